/**
 * Wire types and framing for the model-bridge protocol, version 1.
 *
 * Every message is one line of UTF-8 JSON. The worker emits a single hello
 * line on startup, then answers each request in order with either an
 * outputs object or an error object carrying the same id. Numbers use
 * JavaScript's shortest round-trip formatting.
 */

export const PROTOCOL_VERSION = 1;

export type Task =
  | "regression"
  | "classification_probabilities"
  | "classification_logits";

export const TASKS: readonly Task[] = [
  "regression",
  "classification_probabilities",
  "classification_logits",
];

export interface Hello {
  preddiff_bridge: typeof PROTOCOL_VERSION;
  task: Task;
  n_features: number;
  n_outputs: number;
}

export interface Request {
  id: number;
  inputs: number[][];
}

export interface Response {
  id: number;
  outputs: number[][];
}

export interface ErrorReply {
  id: number;
  error: string;
}

export function helloLine(task: Task, nFeatures: number, nOutputs: number): string {
  const hello: Hello = {
    preddiff_bridge: PROTOCOL_VERSION,
    task,
    n_features: nFeatures,
    n_outputs: nOutputs,
  };
  return JSON.stringify(hello);
}

/** Parse one request line; throws with a short reason on malformed input. */
export function parseRequest(line: string): Request {
  let value: unknown;
  try {
    value = JSON.parse(line);
  } catch {
    throw new Error(`not valid JSON: ${line.slice(0, 80)}`);
  }
  if (typeof value !== "object" || value === null) {
    throw new Error("request must be a JSON object");
  }
  const record = value as Record<string, unknown>;
  if (typeof record.id !== "number" || !Number.isInteger(record.id)) {
    throw new Error("request needs an integer id");
  }
  if (!Array.isArray(record.inputs)) {
    throw new Error("request needs an inputs matrix");
  }
  for (const row of record.inputs) {
    if (!Array.isArray(row) || row.some((v) => typeof v !== "number" || !Number.isFinite(v))) {
      throw new Error("inputs must be rows of finite numbers");
    }
  }
  return { id: record.id, inputs: record.inputs as number[][] };
}

export function responseLine(id: number, outputs: number[][]): string {
  return JSON.stringify({ id, outputs } satisfies Response);
}

export function errorLine(id: number, error: string): string {
  return JSON.stringify({ id, error } satisfies ErrorReply);
}
