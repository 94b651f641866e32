// Shared types mirroring the review service API.

export const CRITERIA = {
  instructional: ["Yes", "No"],
  segment_answer: ["Yes", "No", "Partial"],
  question_quality: ["Correct", "Incorrect", "Partial Correct"],
  alignment: ["Yes", "No", "Partial"],
} as const;

export type Criterion = keyof typeof CRITERIA;
export type Label = (typeof CRITERIA)[Criterion][number];

export const CRITERION_TITLES: Record<Criterion, string> = {
  instructional: "Medical instructional video",
  segment_answer: "Segment contains the visual answer",
  question_quality: "Question quality",
  alignment: "Segment and question aligned",
};

export interface SampleCard {
  sample_id: string;
  video_id: string;
  question: string;
  start_s: number;
  end_s: number;
  subtitle_excerpt: string;
  video_link: string;
  remaining_criteria: Criterion[];
}

export interface JudgmentPayload {
  sample_id: string;
  annotator_id: string;
  criterion: Criterion;
  label: string;
}

export interface SummaryPayload {
  values: Record<string, number>;
  config: { samples: number };
  progress: { judged: number; total: number };
}

export type NextSample = SampleCard | "done";
