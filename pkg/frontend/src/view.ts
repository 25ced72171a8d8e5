// DOM rendering for the single task card. Pair text always goes through
// textContent so premise and hypothesis render as plain text, never as
// markup. Exactly one submission control exists per rendered task.

import type { Task } from './api.js';
import { INSTRUCTIONS, LABEL_TITLES, WRITE_TITLES } from './instructions.js';

export interface TaskHandlers {
  onChoose(label: string): void;
  onWriteInput(): void;
  onSubmit(): void;
}

export function renderTask(
  root: HTMLElement,
  task: Task,
  labels: string[],
  writeFields: string[],
  completed: number,
  handlers: TaskHandlers,
): void {
  root.textContent = '';
  const card = document.createElement('section');
  card.className = 'task-card';
  card.innerHTML = `
    <header class="task-header">
      <span class="kind"></span>
      <span class="counter"></span>
    </header>
    <details class="instructions">
      <summary>Instructions</summary>
      <div class="instructions-body"></div>
    </details>
    <div class="pair">
      <h2>Premise</h2>
      <p class="premise"></p>
    </div>
    <p class="notice" hidden></p>
    <div class="controls">
      <button type="button" class="submit" disabled>Submit</button>
    </div>
  `;
  card.querySelector('.kind')!.textContent = task.kind;
  card.querySelector('.counter')!.textContent = `${completed} completed`;
  card.querySelector('.instructions-body')!.innerHTML = INSTRUCTIONS[task.kind] ?? '';
  card.querySelector('.premise')!.textContent = task.payload.premise_text;

  const notice = card.querySelector('.notice') as HTMLElement;
  if (task.kind === 'write') {
    for (const field of writeFields) {
      const wrap = document.createElement('label');
      wrap.className = 'write-field';
      const title = document.createElement('span');
      title.textContent = WRITE_TITLES[field] ?? field;
      const area = document.createElement('textarea');
      area.rows = 2;
      area.dataset.field = field;
      area.addEventListener('input', () => handlers.onWriteInput());
      wrap.append(title, area);
      card.insertBefore(wrap, notice);
    }
  } else {
    const pair = card.querySelector('.pair')!;
    const head = document.createElement('h2');
    head.textContent = 'Hypothesis';
    const hyp = document.createElement('p');
    hyp.className = 'hypothesis';
    hyp.textContent = task.payload.hypothesis_text ?? '';
    pair.append(head, hyp);

    const choices = document.createElement('div');
    choices.className = 'choices';
    labels.forEach((label, i) => {
      const btn = document.createElement('button');
      btn.type = 'button';
      btn.className = 'choice';
      btn.dataset.label = label;
      const key = document.createElement('kbd');
      key.textContent = String(i + 1);
      const text = document.createElement('span');
      text.textContent = LABEL_TITLES[label] ?? label;
      btn.append(key, text);
      btn.addEventListener('click', () => handlers.onChoose(label));
      choices.append(btn);
    });
    card.insertBefore(choices, notice);
  }

  card.querySelector('.submit')!.addEventListener('click', () => handlers.onSubmit());
  root.append(card);
}

export function renderDone(root: HTMLElement, completed: number): void {
  root.textContent = '';
  const card = document.createElement('section');
  card.className = 'done-card';
  const head = document.createElement('h2');
  head.textContent = 'All done';
  const body = document.createElement('p');
  body.className = 'done-count';
  body.textContent = `No tasks left in this batch. You completed ${completed}.`;
  card.append(head, body);
  root.append(card);
}

export function markSelected(root: HTMLElement, label: string): void {
  root.querySelectorAll<HTMLButtonElement>('.choice').forEach((btn) => {
    btn.classList.toggle('selected', btn.dataset.label === label);
  });
}

export function setSubmitEnabled(root: HTMLElement, enabled: boolean): void {
  const btn = root.querySelector<HTMLButtonElement>('.submit');
  if (btn) btn.disabled = !enabled;
}

export function setNotice(root: HTMLElement, text: string | null): void {
  const el = root.querySelector<HTMLElement>('.notice');
  if (!el) return;
  el.hidden = text === null;
  el.textContent = text ?? '';
}

// Transient status line above the card; does not block interaction.
export function showBanner(root: HTMLElement, text: string): void {
  let el = root.querySelector<HTMLElement>('.banner');
  if (!el) {
    el = document.createElement('p');
    el.className = 'banner';
    root.prepend(el);
  }
  el.textContent = text;
}

export function clearBanner(root: HTMLElement): void {
  root.querySelector('.banner')?.remove();
}

export function writeFieldValues(root: HTMLElement): Record<string, string> {
  const values: Record<string, string> = {};
  root.querySelectorAll<HTMLTextAreaElement>('textarea[data-field]').forEach((area) => {
    values[area.dataset.field!] = area.value;
  });
  return values;
}
