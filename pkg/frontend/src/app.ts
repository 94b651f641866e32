// DOM wiring for the annotation workflow.
//
// State model: one in-flight ReviewCard at a time. Network failures
// raise a retry banner and never discard selections; a 409 on submit
// means another tab already judged the sample, so we skip ahead.

import { ReviewApi, ValidationError, submitCard } from "./api.js";
import { ReviewCard } from "./card.js";
import { spanLabel } from "./format.js";
import { progressRatio, summaryBlocks } from "./summary.js";
import { Criterion, CRITERION_TITLES, SampleCard } from "./types.js";

const api = new ReviewApi();

let card: ReviewCard | null = null;
let focusedCriterion = 0;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function annotatorId(): string {
  return (el<HTMLInputElement>("annotator").value || "anonymous").trim();
}

function showBanner(message: string, retry: () => void): void {
  const banner = el<HTMLDivElement>("banner");
  banner.textContent = "";
  banner.append(message + " ");
  const button = document.createElement("button");
  button.textContent = "Retry";
  button.onclick = () => {
    banner.hidden = true;
    retry();
  };
  banner.append(button);
  banner.hidden = false;
}

function hideBanner(): void {
  el<HTMLDivElement>("banner").hidden = true;
}

function setView(view: "annotate" | "summary"): void {
  el("annotate-view").hidden = view !== "annotate";
  el("summary-view").hidden = view !== "summary";
  el("tab-annotate").classList.toggle("active", view === "annotate");
  el("tab-summary").classList.toggle("active", view === "summary");
}

function renderDone(): void {
  card = null;
  el("card").hidden = true;
  el("done").hidden = false;
}

function renderCard(): void {
  if (!card) return;
  const sample = card.sample;
  el("card").hidden = false;
  el("done").hidden = true;
  el("question").textContent = sample.question;
  el("span").textContent = spanLabel(sample.start_s, sample.end_s);
  el("excerpt").textContent = sample.subtitle_excerpt || "(no excerpt)";
  const link = el<HTMLAnchorElement>("video-link");
  link.href = sample.video_link;
  link.textContent = sample.video_id;

  const form = el<HTMLDivElement>("criteria");
  form.textContent = "";
  card.criteria().forEach((criterion, index) => {
    const row = document.createElement("fieldset");
    row.className = "criterion" + (index === focusedCriterion ? " focused" : "");
    row.dataset.criterion = criterion;
    row.onclick = () => {
      focusedCriterion = index;
      renderCard();
    };
    const legend = document.createElement("legend");
    legend.textContent = `${CRITERION_TITLES[criterion]}`;
    row.append(legend);
    card!.allowedLabels(criterion).forEach((label, li) => {
      const id = `${criterion}-${li}`;
      const wrapper = document.createElement("label");
      wrapper.htmlFor = id;
      const radio = document.createElement("input");
      radio.type = "radio";
      radio.id = id;
      radio.name = criterion;
      radio.value = label;
      radio.checked = card!.labelFor(criterion) === label;
      radio.onchange = () => {
        card!.setLabel(criterion, label);
        focusedCriterion = Math.min(index + 1, card!.criteria().length - 1);
        renderCard();
      };
      wrapper.append(radio, ` ${li + 1}. ${label}`);
      row.append(wrapper);
    });
    form.append(row);
  });

  const submit = el<HTMLButtonElement>("submit");
  submit.disabled = !card.isComplete();
  const missing = card.missingCriteria();
  el("status").textContent = missing.length
    ? `select: ${missing.map((c) => CRITERION_TITLES[c]).join(", ")}`
    : "ready to submit";
}

async function loadNext(): Promise<void> {
  try {
    const next = await api.nextSample(annotatorId());
    hideBanner();
    if (next === "done") {
      renderDone();
      return;
    }
    card = new ReviewCard(next as SampleCard);
    focusedCriterion = 0;
    renderCard();
  } catch (err) {
    showBanner(`Could not reach the review service (${err}).`, loadNext);
  }
}

async function submitCurrent(): Promise<void> {
  if (!card || !card.isComplete()) return;
  const judgments = card.judgments(annotatorId());
  try {
    const outcome = await submitCard(api, judgments);
    hideBanner();
    if (outcome.duplicates > 0) {
      el("status").textContent = "already judged elsewhere; skipping ahead";
    }
    await loadNext();
  } catch (err) {
    if (err instanceof ValidationError) {
      el("status").textContent =
        `rejected: ${err.criterion} allows only ${err.allowed.join(", ")}`;
      return;
    }
    showBanner(`Submit failed (${err}); selections kept.`, submitCurrent);
  }
}

async function loadSummary(): Promise<void> {
  try {
    const payload = await api.summary();
    hideBanner();
    const host = el<HTMLDivElement>("summary-tables");
    host.textContent = "";
    for (const block of summaryBlocks(payload)) {
      const table = document.createElement("table");
      const caption = document.createElement("caption");
      caption.textContent = block.title;
      table.append(caption);
      const head = table.insertRow();
      head.insertCell().textContent = "";
      for (const label of block.labels) {
        head.insertCell().textContent = label;
      }
      for (const row of block.rows) {
        const tr = table.insertRow();
        tr.insertCell().textContent = row.view;
        for (const cell of row.cells) {
          tr.insertCell().textContent = cell;
        }
      }
      host.append(table);
    }
    const ratio = progressRatio(payload);
    el<HTMLProgressElement>("progress").value = ratio;
    el("progress-text").textContent =
      `${payload.progress.judged} / ${payload.progress.total} samples judged`;
  } catch (err) {
    showBanner(`Could not load the summary (${err}).`, loadSummary);
  }
}

function onKey(event: KeyboardEvent): void {
  if (!card || el("annotate-view").hidden) return;
  if (event.target instanceof HTMLInputElement && event.target.type === "text") {
    return;
  }
  const digit = Number(event.key);
  if (digit >= 1 && digit <= 3) {
    const criterion = card.criteria()[focusedCriterion] as Criterion;
    if (card.setLabelByIndex(criterion, digit)) {
      focusedCriterion = Math.min(focusedCriterion + 1, card.criteria().length - 1);
      renderCard();
    }
  } else if (event.key === "ArrowDown") {
    focusedCriterion = Math.min(focusedCriterion + 1, card.criteria().length - 1);
    renderCard();
  } else if (event.key === "ArrowUp") {
    focusedCriterion = Math.max(focusedCriterion - 1, 0);
    renderCard();
  } else if (event.key === "Enter" && card.isComplete()) {
    void submitCurrent();
  }
}

export function start(): void {
  el("tab-annotate").onclick = () => {
    setView("annotate");
    void loadNext();
  };
  el("tab-summary").onclick = () => {
    setView("summary");
    void loadSummary();
  };
  el<HTMLButtonElement>("submit").onclick = () => void submitCurrent();
  el<HTMLInputElement>("annotator").onchange = () => void loadNext();
  document.addEventListener("keydown", onKey);
  setView("annotate");
  void loadNext();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  start();
}
