/**
 * Predictor resolution: built-ins for common cases plus a loader that turns
 * any module exporting a batch function (rows -> outputs, sync or async)
 * into a served predictor.
 */

import { pathToFileURL } from "node:url";
import type { Task } from "./protocol.js";

export type BatchPredict = (rows: number[][]) => number[][] | Promise<number[][]>;

export interface PredictorSpec {
  predict: BatchPredict;
  task: Task;
  nFeatures: number;
  nOutputs: number;
}

export interface CliOptions {
  predictor: string;
  task?: Task;
  nFeatures?: number;
  nOutputs?: number;
  betas?: number[];
  intercept: number;
  value: number;
}

export async function resolvePredictor(options: CliOptions): Promise<PredictorSpec> {
  const name = options.predictor;
  if (name === "identity") {
    const width = options.nFeatures ?? 2;
    return {
      predict: (rows) => rows.map((row) => [...row]),
      task: options.task ?? "classification_logits",
      nFeatures: width,
      nOutputs: width,
    };
  }
  if (name === "linear") {
    const betas = options.betas;
    if (!betas || betas.length === 0) {
      throw new Error("linear predictor needs --betas b1,b2,...");
    }
    const intercept = options.intercept;
    return {
      predict: (rows) =>
        rows.map((row) => [
          intercept + row.reduce((acc, v, i) => acc + v * (betas[i] ?? 0), 0),
        ]),
      task: "regression",
      nFeatures: betas.length,
      nOutputs: 1,
    };
  }
  if (name === "constant") {
    const width = options.nFeatures ?? 1;
    return {
      predict: (rows) => rows.map(() => [options.value]),
      task: "regression",
      nFeatures: width,
      nOutputs: 1,
    };
  }
  if (name.startsWith("module:")) {
    return loadModulePredictor(name.slice("module:".length), options);
  }
  throw new Error(`unknown predictor: ${name}`);
}

async function loadModulePredictor(spec: string, options: CliOptions): Promise<PredictorSpec> {
  const [path, exportName] = spec.split("#", 2);
  const loaded = await import(pathToFileURL(path).href);
  const candidate = exportName ? loaded[exportName] : loaded.default;
  if (typeof candidate !== "function") {
    throw new Error(`module ${path} does not export a callable ${exportName ?? "default"}`);
  }
  if (!options.task || !options.nFeatures || !options.nOutputs) {
    throw new Error("module predictors need --task, --n-features and --n-outputs");
  }
  return {
    predict: candidate as BatchPredict,
    task: options.task,
    nFeatures: options.nFeatures,
    nOutputs: options.nOutputs,
  };
}
