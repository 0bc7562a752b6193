#!/usr/bin/env node
/**
 * Reference worker for the model-bridge protocol v1.
 *
 * Emits one hello line declaring the predictor's task and shapes, then
 * answers every request line in order. Predictor failures and malformed
 * requests produce error objects without closing the connection; EOF on
 * stdin ends the process with exit code 0.
 *
 * Usage:
 *   preddiff-bridge-worker --predictor linear --betas 2,3,-1 [--intercept 0]
 *   preddiff-bridge-worker --predictor identity --n-features 3
 *   preddiff-bridge-worker --predictor module:./model.js#predict \
 *       --task regression --n-features 4 --n-outputs 1
 */

import * as readline from "node:readline";
import { resolvePredictor, type CliOptions, type PredictorSpec } from "./predictors.js";
import { TASKS, type Task, errorLine, helloLine, parseRequest, responseLine } from "./protocol.js";

function parseArgs(argv: string[]): CliOptions {
  const options: CliOptions = { predictor: "identity", intercept: 0, value: 0 };
  for (let i = 0; i < argv.length; i += 1) {
    const flag = argv[i];
    const next = () => {
      i += 1;
      if (i >= argv.length) throw new Error(`${flag} needs a value`);
      return argv[i];
    };
    switch (flag) {
      case "--predictor":
        options.predictor = next();
        break;
      case "--task": {
        const task = next();
        if (!TASKS.includes(task as Task)) throw new Error(`unknown task: ${task}`);
        options.task = task as Task;
        break;
      }
      case "--n-features":
        options.nFeatures = Number(next());
        break;
      case "--n-outputs":
        options.nOutputs = Number(next());
        break;
      case "--betas":
        options.betas = next().split(",").map(Number);
        break;
      case "--intercept":
        options.intercept = Number(next());
        break;
      case "--value":
        options.value = Number(next());
        break;
      default:
        throw new Error(`unknown flag: ${flag}`);
    }
  }
  return options;
}

function validateOutputs(outputs: unknown, nRows: number, nOutputs: number): number[][] {
  if (!Array.isArray(outputs) || outputs.length !== nRows) {
    throw new Error(`predictor returned ${Array.isArray(outputs) ? outputs.length : "?"} rows, expected ${nRows}`);
  }
  for (const row of outputs) {
    if (!Array.isArray(row) || row.length !== nOutputs) {
      throw new Error(`predictor row width ${Array.isArray(row) ? row.length : "?"}, expected ${nOutputs}`);
    }
    for (const v of row) {
      if (typeof v !== "number" || !Number.isFinite(v)) {
        throw new Error("predictor produced a non-finite value");
      }
    }
  }
  return outputs as number[][];
}

async function serve(spec: PredictorSpec): Promise<void> {
  process.stdout.write(helloLine(spec.task, spec.nFeatures, spec.nOutputs) + "\n");
  const lines = readline.createInterface({ input: process.stdin, crlfDelay: Infinity });
  for await (const line of lines) {
    if (line.trim() === "") continue;
    let id = -1;
    try {
      const request = parseRequest(line);
      id = request.id;
      for (const row of request.inputs) {
        if (row.length !== spec.nFeatures) {
          throw new Error(`input width ${row.length}, expected ${spec.nFeatures}`);
        }
      }
      const outputs = validateOutputs(
        await spec.predict(request.inputs),
        request.inputs.length,
        spec.nOutputs,
      );
      process.stdout.write(responseLine(id, outputs) + "\n");
    } catch (error) {
      const message = error instanceof Error ? error.message : String(error);
      process.stdout.write(errorLine(id, message) + "\n");
    }
  }
}

async function main(): Promise<number> {
  let options: CliOptions;
  let spec: PredictorSpec;
  try {
    options = parseArgs(process.argv.slice(2));
    spec = await resolvePredictor(options);
  } catch (error) {
    console.error(`preddiff-bridge-worker: ${error instanceof Error ? error.message : error}`);
    return 2;
  }
  await serve(spec);
  return 0;
}

main().then(
  (code) => process.exit(code),
  (error) => {
    console.error(`preddiff-bridge-worker: ${error}`);
    process.exit(1);
  },
);
