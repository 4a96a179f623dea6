/** Pure geometry for the radius-per-iteration line chart (rendered as SVG). */

export interface RadiusSample {
  iteration: number;
  r_max: number;
}

export interface ChartPoint {
  x: number;
  y: number;
  iteration: number;
  r_max: number;
}

export interface ChartModel {
  width: number;
  height: number;
  points: ChartPoint[];
  /** Space-separated "x,y" pairs, ready for an SVG <polyline>. */
  polyline: string;
}

const round = (v: number): number => Math.round(v * 100) / 100;

export function radiusChart(
  samples: RadiusSample[],
  width = 360,
  height = 140,
  pad = 14,
): ChartModel {
  const points: ChartPoint[] = [];
  if (samples.length > 0) {
    const iterations = samples.map((s) => s.iteration);
    const lo = Math.min(...iterations);
    const span = Math.max(...iterations) - lo;
    const yMax = Math.max(...samples.map((s) => s.r_max), 0);
    for (const s of samples) {
      const fx = span === 0 ? 0.5 : (s.iteration - lo) / span;
      const fy = yMax === 0 ? 1 : 1 - s.r_max / yMax; // larger radius drawn higher
      points.push({
        x: round(pad + fx * (width - 2 * pad)),
        y: round(pad + fy * (height - 2 * pad)),
        iteration: s.iteration,
        r_max: s.r_max,
      });
    }
  }
  return {
    width,
    height,
    points,
    polyline: points.map((p) => `${p.x},${p.y}`).join(" "),
  };
}
