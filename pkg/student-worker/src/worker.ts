/**
 * Reference student worker.
 *
 * Speaks newline-delimited JSON over stdin/stdout in strict
 * request/response alternation:
 *
 *   {"cmd":"init","seed":7,"config":{"lr":0.5}} -> {"ok":true,"name":"template-classifier","version":"1"}
 *   {"cmd":"train","passes":1,"problems":[...]} -> {"ok":true}
 *   {"cmd":"solve","problem":{...}}             -> {"equation":"N1 + N2","confidence":0.9} | {"abstain":true}
 *   {"cmd":"shutdown"}                          -> {"ok":true} and exit 0
 *
 * Malformed input lines get {"error": "..."} and the loop continues.
 */

import { createInterface } from "node:readline";
import { pathToFileURL } from "node:url";
import { TemplateClassifier, TrainingExample } from "./classifier.js";

const WORKER_NAME = "template-classifier";
const WORKER_VERSION = "1";

interface ProblemRecord {
  id?: string;
  text?: string;
  quantities?: number[];
  equation?: string;
  answer?: number;
  source?: string;
}

function reply(payload: unknown): void {
  process.stdout.write(JSON.stringify(payload) + "\n");
}

function asExamples(problems: ProblemRecord[]): TrainingExample[] {
  const examples: TrainingExample[] = [];
  for (const record of problems) {
    if (typeof record.text === "string" && typeof record.equation === "string") {
      examples.push({ text: record.text, equation: record.equation });
    }
  }
  return examples;
}

export function handleMessage(
  classifier: TemplateClassifier,
  message: Record<string, unknown>
): { payload: unknown; shutdown: boolean } {
  switch (message["cmd"]) {
    case "init": {
      const seed = typeof message["seed"] === "number" ? message["seed"] : 0;
      const config = (message["config"] ?? {}) as Record<string, unknown>;
      const lr = typeof config["lr"] === "number" ? config["lr"] : undefined;
      classifier.reset(seed, lr);
      return {
        payload: { ok: true, name: WORKER_NAME, version: WORKER_VERSION },
        shutdown: false,
      };
    }
    case "train": {
      const passes = typeof message["passes"] === "number" ? message["passes"] : 1;
      const problems = Array.isArray(message["problems"])
        ? (message["problems"] as ProblemRecord[])
        : [];
      classifier.train(asExamples(problems), passes);
      return { payload: { ok: true }, shutdown: false };
    }
    case "solve": {
      const problem = (message["problem"] ?? {}) as ProblemRecord;
      const prediction = classifier.predict({
        text: problem.text ?? "",
        quantities: Array.isArray(problem.quantities) ? problem.quantities : [],
      });
      if (prediction === null) {
        return { payload: { abstain: true }, shutdown: false };
      }
      return {
        payload: { equation: prediction.equation, confidence: prediction.confidence },
        shutdown: false,
      };
    }
    case "shutdown":
      return { payload: { ok: true }, shutdown: true };
    default:
      return {
        payload: { error: `unknown cmd ${JSON.stringify(message["cmd"])}` },
        shutdown: false,
      };
  }
}

function main(): void {
  const classifier = new TemplateClassifier();
  const lines = createInterface({ input: process.stdin, terminal: false });
  lines.on("line", (line) => {
    const trimmed = line.trim();
    if (!trimmed) return;
    let message: unknown;
    try {
      message = JSON.parse(trimmed);
    } catch {
      reply({ error: "input line is not JSON" });
      return;
    }
    if (typeof message !== "object" || message === null || Array.isArray(message)) {
      reply({ error: "input line is not an object" });
      return;
    }
    const { payload, shutdown } = handleMessage(
      classifier,
      message as Record<string, unknown>
    );
    reply(payload);
    if (shutdown) {
      process.exit(0);
    }
  });
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href;
if (invokedDirectly) {
  main();
}
