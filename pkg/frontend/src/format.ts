// Display helpers.

export function mmss(seconds: number): string {
  const total = Math.max(0, Math.round(seconds));
  const m = Math.floor(total / 60);
  const s = total % 60;
  return `${String(m).padStart(2, "0")}:${String(s).padStart(2, "0")}`;
}

export function spanLabel(startS: number, endS: number): string {
  return `${mmss(startS)} – ${mmss(endS)}`;
}

export function percent(value: number): string {
  return value.toFixed(2);
}
