import type { Histogram, Metrics } from "./types";

export interface RecallSeries {
  t: number[];
  found: number[];
  ideal: number[];
  random: number[];
}

// The chart draws the metrics payload and nothing else. Lengths must
// agree with the iteration count or the payload is corrupt.
export function recallSeries(m: Metrics): RecallSeries {
  const T = m.iteration;
  if (
    m.recall.length !== T ||
    m.ideal.length !== T ||
    m.random_expect.length !== T
  ) {
    throw new Error(
      `metrics series lengths (${m.recall.length}/${m.ideal.length}/` +
        `${m.random_expect.length}) disagree with iteration count ${T}`,
    );
  }
  return {
    t: Array.from({ length: T }, (_, i) => i + 1),
    found: [...m.recall],
    ideal: [...m.ideal],
    random: [...m.random_expect],
  };
}

interface Box {
  width: number;
  height: number;
  pad: number;
}

function polyline(
  xs: number[],
  ys: number[],
  xMax: number,
  yMax: number,
  box: Box,
  cls: string,
): string {
  const { width, height, pad } = box;
  const sx = (x: number) => pad + (x / xMax) * (width - 2 * pad);
  const sy = (y: number) => height - pad - (y / yMax) * (height - 2 * pad);
  const pts = xs.map((x, i) => `${sx(x).toFixed(1)},${sy(ys[i]!).toFixed(1)}`);
  return `<polyline class="${cls}" fill="none" points="${pts.join(" ")}"/>`;
}

export function recallChartSvg(m: Metrics, width = 460, height = 240): string {
  const box: Box = { width, height, pad: 28 };
  const s = recallSeries(m);
  const xMax = Math.max(m.budget, 1);
  const yMax = Math.max(1, ...s.ideal, ...s.found);
  const parts: string[] = [
    `<svg class="recall-chart" viewBox="0 0 ${width} ${height}" role="img" aria-label="recall curve">`,
    `<rect class="chart-bg" x="0" y="0" width="${width}" height="${height}"/>`,
    `<line class="axis" x1="${box.pad}" y1="${height - box.pad}" x2="${width - box.pad}" y2="${height - box.pad}"/>`,
    `<line class="axis" x1="${box.pad}" y1="${box.pad}" x2="${box.pad}" y2="${height - box.pad}"/>`,
  ];
  if (s.t.length > 0) {
    // anchor every series at the origin so single-point curves are visible
    const t = [0, ...s.t];
    parts.push(
      polyline(t, [0, ...s.ideal], xMax, yMax, box, "line-ideal"),
      polyline(t, [0, ...s.random], xMax, yMax, box, "line-random"),
      polyline(t, [0, ...s.found], xMax, yMax, box, "line-found"),
    );
  } else {
    parts.push(
      `<text class="chart-note" x="${width / 2}" y="${height / 2}" text-anchor="middle">no labels yet</text>`,
    );
  }
  parts.push(
    `<text class="chart-label" x="${width - box.pad}" y="${height - 8}" text-anchor="end">queries (budget ${m.budget})</text>`,
    "</svg>",
  );
  return parts.join("");
}

export function histogramSvg(h: Histogram, width = 460, height = 90): string {
  const counts = h.counts;
  const total = counts.reduce((a, b) => a + b, 0);
  const peak = Math.max(1, ...counts);
  const barW = width / Math.max(1, counts.length);
  const bars = counts
    .map((c, i) => {
      const barH = (c / peak) * (height - 14);
      const x = (i * barW).toFixed(1);
      const y = (height - barH).toFixed(1);
      return `<rect class="hist-bar" x="${x}" y="${y}" width="${(barW - 1).toFixed(1)}" height="${barH.toFixed(1)}"><title>[${h.edges[i]?.toFixed(3)}, ${h.edges[i + 1]?.toFixed(3)}): ${c}</title></rect>`;
    })
    .join("");
  return (
    `<svg class="score-hist" viewBox="0 0 ${width} ${height}" role="img" aria-label="score distribution">` +
    bars +
    `<text class="chart-label" x="4" y="10">score distribution (${total} points)</text>` +
    "</svg>"
  );
}
