import { describe, expect, it } from "vitest";
import { histogramSvg, recallChartSvg, recallSeries } from "../src/chart";
import type { Metrics } from "../src/types";

function metricsDoc(over: Partial<Metrics> = {}): Metrics {
  const recall = [0, 1, 1, 2];
  return {
    iteration: 4,
    budget: 10,
    recall,
    ideal: [1, 2, 3, 4],
    random_expect: [0.1, 0.2, 0.3, 0.4],
    latency_seconds: [0.001, 0.001, 0.001, 0.001],
    f_summary: {
      min: 0,
      max: 1,
      mean: 0.3,
      histogram: { edges: [0, 0.25, 0.5, 0.75, 1], counts: [4, 3, 2, 1] },
    },
    exhausted: false,
    ...over,
  };
}

describe("recallSeries", () => {
  it("copies the service arrays verbatim against t = 1..T", () => {
    const s = recallSeries(metricsDoc());
    expect(s.t).toEqual([1, 2, 3, 4]);
    expect(s.found).toEqual([0, 1, 1, 2]);
    expect(s.ideal).toEqual([1, 2, 3, 4]);
    expect(s.random).toEqual([0.1, 0.2, 0.3, 0.4]);
  });

  it("returns copies, not references into the payload", () => {
    const m = metricsDoc();
    const s = recallSeries(m);
    s.found[0] = 99;
    expect(m.recall[0]).toBe(0);
  });

  it("rejects a payload whose series disagree with the iteration count", () => {
    const m = metricsDoc({ recall: [0, 1] }); // iteration still 4
    expect(() => recallSeries(m)).toThrow(/disagree with iteration count/);
  });

  it("handles the empty session", () => {
    const m = metricsDoc({
      iteration: 0,
      recall: [],
      ideal: [],
      random_expect: [],
      latency_seconds: [],
    });
    const s = recallSeries(m);
    expect(s.t).toEqual([]);
    expect(s.found).toEqual([]);
  });
});

describe("recallChartSvg", () => {
  it("draws one polyline per series, each anchored at the origin", () => {
    const svg = recallChartSvg(metricsDoc());
    for (const cls of ["line-found", "line-ideal", "line-random"]) {
      const m = svg.match(new RegExp(`class="${cls}"[^>]*points="([^"]*)"`));
      expect(m, `missing ${cls}`).not.toBeNull();
      const pts = (m as RegExpMatchArray)[1]!.trim().split(/\s+/);
      // origin + one vertex per labeled round
      expect(pts).toHaveLength(5);
    }
  });

  it("renders a placeholder before any labels exist", () => {
    const svg = recallChartSvg(
      metricsDoc({
        iteration: 0,
        recall: [],
        ideal: [],
        random_expect: [],
        latency_seconds: [],
      }),
    );
    expect(svg).toContain("no labels yet");
    expect(svg).not.toContain("polyline");
  });
});

describe("histogramSvg", () => {
  it("draws one bar per bin and reports the population", () => {
    const svg = histogramSvg(metricsDoc().f_summary.histogram);
    const bars = svg.match(/class="hist-bar"/g) ?? [];
    expect(bars).toHaveLength(4);
    expect(svg).toContain("score distribution (10 points)");
  });

  it("survives a zero-count histogram", () => {
    const svg = histogramSvg({ edges: [0, 0.5, 1], counts: [0, 0] });
    const bars = svg.match(/class="hist-bar"/g) ?? [];
    expect(bars).toHaveLength(2);
  });
});
