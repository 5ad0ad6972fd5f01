import assert from "node:assert/strict";
import { once } from "node:events";
import { spawn, type ChildProcessByStdio } from "node:child_process";
import type { Readable, Writable } from "node:stream";
import { createInterface, type Interface } from "node:readline";
import { fileURLToPath } from "node:url";
import { test } from "node:test";

import { TemplateClassifier } from "../src/classifier.js";
import { handleMessage } from "../src/worker.js";

const WORKER = fileURLToPath(new URL("../src/worker.js", import.meta.url));

class WorkerHandle {
  proc: ChildProcessByStdio<Writable, Readable, null>;
  private lines: Interface;
  private queue: string[] = [];
  private waiters: ((line: string) => void)[] = [];

  constructor() {
    this.proc = spawn(process.execPath, [WORKER], { stdio: ["pipe", "pipe", "inherit"] });
    this.lines = createInterface({ input: this.proc.stdout });
    this.lines.on("line", (line) => {
      const waiter = this.waiters.shift();
      if (waiter) waiter(line);
      else this.queue.push(line);
    });
  }

  async request(message: unknown): Promise<Record<string, unknown>> {
    this.proc.stdin.write(JSON.stringify(message) + "\n");
    return JSON.parse(await this.nextLine());
  }

  async sendRaw(line: string): Promise<Record<string, unknown>> {
    this.proc.stdin.write(line + "\n");
    return JSON.parse(await this.nextLine());
  }

  private nextLine(): Promise<string> {
    const queued = this.queue.shift();
    if (queued !== undefined) return Promise.resolve(queued);
    return new Promise((resolve) => this.waiters.push(resolve));
  }
}

test("handleMessage implements the four commands", () => {
  const classifier = new TemplateClassifier();
  const init = handleMessage(classifier, { cmd: "init", seed: 7, config: {} });
  assert.deepEqual(init.payload, { ok: true, name: "template-classifier", version: "1" });

  const train = handleMessage(classifier, {
    cmd: "train",
    passes: 3,
    problems: [
      { id: "a", text: "N1 pears in a basket gains N2", equation: "N1 + N2", answer: 5 },
    ],
  });
  assert.deepEqual(train.payload, { ok: true });

  const solve = handleMessage(classifier, {
    cmd: "solve",
    problem: { id: "q", text: "a basket gains pears", quantities: [3, 2] },
  });
  assert.equal((solve.payload as { equation: string }).equation, "N1 + N2");

  const unknown = handleMessage(classifier, { cmd: "dance" });
  assert.match((unknown.payload as { error: string }).error, /unknown cmd/);

  const shutdown = handleMessage(classifier, { cmd: "shutdown" });
  assert.equal(shutdown.shutdown, true);
});

test("solve before any train abstains", () => {
  const classifier = new TemplateClassifier();
  handleMessage(classifier, { cmd: "init", seed: 1, config: {} });
  const solve = handleMessage(classifier, {
    cmd: "solve",
    problem: { id: "q", text: "anything with words", quantities: [1] },
  });
  assert.deepEqual(solve.payload, { abstain: true });
});

test("end to end over stdio: init, train, solve, bad line, shutdown", async () => {
  const worker = new WorkerHandle();
  const init = await worker.request({ cmd: "init", seed: 7, config: { lr: 0.5 } });
  assert.equal(init["ok"], true);
  assert.equal(init["name"], "template-classifier");

  const train = await worker.request({
    cmd: "train",
    passes: 20,
    problems: [
      { id: "a", text: "Tom has N1 apples in a basket and gains N2 more.", equation: "N1 + N2" },
      { id: "b", text: "Liam had N1 marbles and gave N2 away, fewer left.", equation: "N1 - N2" },
    ],
  });
  assert.equal(train["ok"], true);

  const solve = await worker.request({
    cmd: "solve",
    problem: { id: "q", text: "Ava keeps N1 shells in a basket and gains N2.", quantities: [5, 2] },
  });
  assert.equal(solve["equation"], "N1 + N2");

  const bad = await worker.sendRaw("this is not json");
  assert.match(String(bad["error"]), /not JSON/);

  const shutdown = await worker.request({ cmd: "shutdown" });
  assert.equal(shutdown["ok"], true);
  const [code] = (await once(worker.proc, "exit")) as [number];
  assert.equal(code, 0);
});

test("re-init resets the classifier state", async () => {
  const worker = new WorkerHandle();
  await worker.request({ cmd: "init", seed: 1, config: {} });
  await worker.request({
    cmd: "train",
    passes: 5,
    problems: [{ id: "a", text: "basket gains N1 and N2", equation: "N1 + N2" }],
  });
  await worker.request({ cmd: "init", seed: 2, config: {} });
  const solve = await worker.request({
    cmd: "solve",
    problem: { id: "q", text: "basket gains things", quantities: [1, 2] },
  });
  assert.deepEqual(solve, { abstain: true });
  await worker.request({ cmd: "shutdown" });
  await once(worker.proc, "exit");
});
