/**
 * Linear bag-of-words classifier over equation templates.
 *
 * Every distinct equation string seen in training becomes a class; features
 * are lowercase word counts of the problem text with placeholder tokens
 * (N1, N2, ...) dropped. Training runs plain softmax-regression gradient
 * passes in data order with zero-initialized weights, so behavior is fully
 * deterministic for a given message sequence.
 */

const TOKEN = /[a-z0-9]+/g;
const PLACEHOLDER = /^n\d+$/;

export interface TrainingExample {
  text: string;
  equation: string;
}

export interface SolveQuery {
  text: string;
  quantities: number[];
}

export function tokenize(text: string): string[] {
  const tokens = text.toLowerCase().match(TOKEN) ?? [];
  return tokens.filter((t) => !PLACEHOLDER.test(t));
}

export function maxPlaceholder(equation: string): number {
  let max = 0;
  for (const match of equation.matchAll(/N(\d+)/g)) {
    max = Math.max(max, Number(match[1]));
  }
  return max;
}

export class TemplateClassifier {
  private vocabulary = new Map<string, number>();
  private classes: string[] = [];
  private classIndex = new Map<string, number>();
  private weights: number[][] = []; // per class, indexed by feature
  private bias: number[] = [];
  private learningRate: number;
  seed = 0;

  constructor(learningRate = 0.5) {
    this.learningRate = learningRate;
  }

  reset(seed: number, learningRate?: number): void {
    this.vocabulary = new Map();
    this.classes = [];
    this.classIndex = new Map();
    this.weights = [];
    this.bias = [];
    this.seed = seed;
    if (learningRate !== undefined && learningRate > 0) {
      this.learningRate = learningRate;
    }
  }

  get classCount(): number {
    return this.classes.length;
  }

  registeredTemplates(): string[] {
    return [...this.classes];
  }

  private featureOf(token: string): number {
    let index = this.vocabulary.get(token);
    if (index === undefined) {
      index = this.vocabulary.size;
      this.vocabulary.set(token, index);
    }
    return index;
  }

  private classOf(equation: string): number {
    let index = this.classIndex.get(equation);
    if (index === undefined) {
      index = this.classes.length;
      this.classIndex.set(equation, index);
      this.classes.push(equation);
      this.weights.push([]);
      this.bias.push(0);
    }
    return index;
  }

  private counts(text: string): Map<number, number> {
    const counts = new Map<number, number>();
    for (const token of tokenize(text)) {
      const feature = this.featureOf(token);
      counts.set(feature, (counts.get(feature) ?? 0) + 1);
    }
    return counts;
  }

  private countsReadonly(text: string): Map<number, number> {
    // like counts(), but unseen tokens are ignored instead of growing the vocab
    const counts = new Map<number, number>();
    for (const token of tokenize(text)) {
      const feature = this.vocabulary.get(token);
      if (feature === undefined) continue;
      counts.set(feature, (counts.get(feature) ?? 0) + 1);
    }
    return counts;
  }

  private scores(features: Map<number, number>): number[] {
    return this.classes.map((_, c) => {
      const row = this.weights[c]!;
      let score = this.bias[c]!;
      for (const [feature, count] of features) {
        score += (row[feature] ?? 0) * count;
      }
      return score;
    });
  }

  train(examples: TrainingExample[], passes: number): void {
    for (const example of examples) {
      this.classOf(example.equation); // register every template up front
    }
    for (let pass = 0; pass < Math.max(1, passes); pass++) {
      for (const example of examples) {
        const features = this.counts(example.text);
        const target = this.classOf(example.equation);
        const scores = this.scores(features);
        const top = Math.max(...scores);
        const exps = scores.map((s) => Math.exp(s - top));
        const total = exps.reduce((a, b) => a + b, 0);
        for (let c = 0; c < this.classes.length; c++) {
          const gradient = exps[c]! / total - (c === target ? 1 : 0);
          if (gradient === 0) continue;
          const row = this.weights[c]!;
          const step = this.learningRate * gradient;
          for (const [feature, count] of features) {
            row[feature] = (row[feature] ?? 0) - step * count;
          }
          this.bias[c] = this.bias[c]! - step;
        }
      }
    }
  }

  /**
   * Highest-scoring registered template whose placeholders all fit the
   * query's quantity count, or null to abstain.
   */
  predict(query: SolveQuery): { equation: string; confidence: number } | null {
    if (this.classes.length === 0) return null;
    const eligible = this.classes
      .map((equation, index) => ({ equation, index }))
      .filter(({ equation }) => maxPlaceholder(equation) <= query.quantities.length);
    if (eligible.length === 0) return null;
    const features = this.countsReadonly(query.text);
    const scores = this.scores(features);
    let best = eligible[0]!;
    for (const candidate of eligible.slice(1)) {
      if (scores[candidate.index]! > scores[best.index]!) {
        best = candidate;
      }
    }
    const top = Math.max(...scores);
    const exps = scores.map((s) => Math.exp(s - top));
    const total = exps.reduce((a, b) => a + b, 0);
    return { equation: best.equation, confidence: exps[best.index]! / total };
  }
}
