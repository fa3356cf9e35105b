import type { CreateSessionRequest, DatasetInfo } from "./types";

// Raw form values, all strings as they come out of the inputs.
export interface SetupInput {
  dataset: string;
  engine: string;
  budget: string;
  lambda: string;
  w0: string;
  pi: string;
  alpha: string;
}

export type FieldErrors = Partial<Record<keyof SetupInput, string>>;

export interface SetupResult {
  errors: FieldErrors;
  request?: CreateSessionRequest;
}

export function defaultsFor(dataset?: DatasetInfo): SetupInput {
  return {
    dataset: dataset?.name ?? "",
    engine: "las",
    budget: "50",
    lambda: "1",
    w0: "1",
    // a known base rate is the natural prior
    pi: dataset?.prevalence != null ? String(dataset.prevalence) : "0.5",
    alpha: "1e-6",
  };
}

function num(text: string): number {
  const trimmed = text.trim();
  return trimmed === "" ? NaN : Number(trimmed);
}

// Mirrors the service's create-session rules so bad values never leave
// the form. The server remains the authority; this only saves a round trip.
export function validateSetup(input: SetupInput): SetupResult {
  const errors: FieldErrors = {};

  if (!input.dataset) {
    errors.dataset = "pick a dataset";
  }
  if (input.engine !== "las" && input.engine !== "wnas") {
    errors.engine = "engine must be las or wnas";
  }
  const budget = num(input.budget);
  if (!Number.isInteger(budget) || budget < 1) {
    errors.budget = "budget must be a whole number >= 1";
  }
  const lambda = num(input.lambda);
  if (!Number.isFinite(lambda) || lambda <= 0) {
    errors.lambda = "lambda must be > 0";
  }
  const w0 = num(input.w0);
  if (!Number.isFinite(w0) || w0 <= 0) {
    errors.w0 = "w0 must be > 0";
  }
  const pi = num(input.pi);
  if (!Number.isFinite(pi) || pi < 0 || pi > 1) {
    errors.pi = "pi must be between 0 and 1";
  }
  const alpha = num(input.alpha);
  if (!Number.isFinite(alpha) || alpha < 0) {
    errors.alpha = "alpha must be >= 0";
  }

  if (Object.keys(errors).length > 0) {
    return { errors };
  }
  return {
    errors,
    request: {
      dataset: input.dataset,
      engine: input.engine as "las" | "wnas",
      budget,
      hyperparams: { lambda, w0, pi, alpha },
    },
  };
}
