// Client-side view model for one sample under review.
//
// Selection state lives here so the DOM layer stays a thin renderer;
// submission is only possible once every criterion has a label, and a
// label outside its criterion's set can never be stored.

import { CRITERIA, Criterion, SampleCard } from "./types.js";

export class ReviewCard {
  readonly sample: SampleCard;
  private selected: Partial<Record<Criterion, string>> = {};

  constructor(sample: SampleCard) {
    this.sample = sample;
  }

  criteria(): Criterion[] {
    return Object.keys(CRITERIA) as Criterion[];
  }

  allowedLabels(criterion: Criterion): readonly string[] {
    return CRITERIA[criterion];
  }

  setLabel(criterion: Criterion, label: string): void {
    if (!(criterion in CRITERIA)) {
      throw new Error(`unknown criterion: ${criterion}`);
    }
    if (!CRITERIA[criterion].includes(label as never)) {
      throw new Error(
        `label "${label}" not allowed for ${criterion}; ` +
          `expected one of ${CRITERIA[criterion].join(", ")}`,
      );
    }
    this.selected[criterion] = label;
  }

  labelFor(criterion: Criterion): string | null {
    return this.selected[criterion] ?? null;
  }

  /** Pick a label by its 1-based position (keyboard shortcuts). */
  setLabelByIndex(criterion: Criterion, index: number): boolean {
    const labels = CRITERIA[criterion];
    if (index < 1 || index > labels.length) return false;
    this.setLabel(criterion, labels[index - 1]);
    return true;
  }

  missingCriteria(): Criterion[] {
    return this.criteria().filter((c) => this.labelFor(c) === null);
  }

  isComplete(): boolean {
    return this.missingCriteria().length === 0;
  }

  judgments(annotatorId: string) {
    if (!this.isComplete()) {
      throw new Error(
        `cannot submit: missing ${this.missingCriteria().join(", ")}`,
      );
    }
    return this.criteria().map((criterion) => ({
      sample_id: this.sample.sample_id,
      annotator_id: annotatorId,
      criterion,
      label: this.selected[criterion]!,
    }));
  }
}
