import { HttpApiClient } from "./api.js";
import { SessionController } from "./controller.js";
import { render } from "./render.js";
import type { SessionRequest } from "./types.js";

function readConfig(form: HTMLFormElement): SessionRequest {
  const data = new FormData(form);
  const text = (name: string): string => String(data.get(name) ?? "").trim();
  const cfg: SessionRequest = {
    k: Number(text("k") || "2"),
    iterations: Number(text("iterations") || "30"),
    center: text("center") || "chebyshev",
    selection: text("selection") || "bnb",
    bound_mode: text("bound_mode") || "paper",
    stop_on_indifference: data.get("stop_on_indifference") !== null,
  };
  if (text("seed") !== "") cfg.seed = Number(text("seed"));
  return cfg;
}

function main(): void {
  const root = document.getElementById("app");
  const form = document.getElementById("setup-form") as HTMLFormElement | null;
  if (!root || !form) throw new Error("page shell is missing #app or #setup-form");

  const controller = new SessionController(new HttpApiClient(""));
  const handlers = {
    onAnswer: (preference: 1 | -1 | 0) => void controller.submit(preference),
    onTopK: (k: number) => void controller.setTopK(k),
  };
  controller.subscribe(() => {
    form.hidden = controller.state.phase !== "setup";
    render(root, controller.state, handlers);
  });
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void controller.start(readConfig(form));
  });
}

main();
