// Session state machine: fetch a leased task, render it, submit, repeat
// until the batch is exhausted. One user action is in flight at a time;
// repeated submit clicks while a request runs are ignored, and every
// attempt for a given task reuses one idempotency key, so a double
// submission can never create a second record.

import { ApiClient, ApiError, Task } from './api.js';
import {
  clearBanner,
  markSelected,
  renderDone,
  renderTask,
  setNotice,
  setSubmitEnabled,
  showBanner,
  writeFieldValues,
} from './view.js';

export interface AppOptions {
  workerId: string;
  batchId: string;
}

function squash(text: string): string {
  return text.toLowerCase().replace(/\s+/g, ' ').trim();
}

export class App {
  private pending: Task | null = null;
  private completed = 0;
  private busy = false;
  private queue: Promise<void> = Promise.resolve();
  private labels: string[] = [];
  private writeFields: string[] = [];
  private selected: string | null = null;
  private keyHandler: ((ev: KeyboardEvent) => void) | null = null;

  constructor(
    private root: HTMLElement,
    private client: ApiClient,
    private opts: AppOptions,
  ) {}

  async start(): Promise<void> {
    const meta = await this.client.meta();
    this.labels = meta.labels;
    this.writeFields = meta.write_fields;
    this.keyHandler = (ev) => this.onKey(ev);
    this.root.ownerDocument.addEventListener('keydown', this.keyHandler);
    await this.advance();
  }

  stop(): void {
    if (this.keyHandler) {
      this.root.ownerDocument.removeEventListener('keydown', this.keyHandler);
      this.keyHandler = null;
    }
  }

  // Resolves once the current action (if any) has finished.
  idle(): Promise<void> {
    return this.queue;
  }

  completedCount(): number {
    return this.completed;
  }

  private act(fn: () => Promise<void>): void {
    if (this.busy) return;
    this.busy = true;
    this.queue = fn()
      .catch((err) => showBanner(this.root, `unexpected error: ${err}`))
      .finally(() => {
        this.busy = false;
      });
  }

  private async advance(): Promise<void> {
    const { task } = await this.client.nextTask(this.opts.workerId, this.opts.batchId);
    this.pending = task;
    this.selected = null;
    if (task === null) {
      this.stop();
      renderDone(this.root, this.completed);
      return;
    }
    renderTask(this.root, task, this.labels, this.writeFields, this.completed, {
      onChoose: (label) => this.choose(label),
      onWriteInput: () => this.validateWrite(),
      onSubmit: () => this.act(() => this.submitPending()),
    });
  }

  private choose(label: string): void {
    if (!this.pending || this.pending.kind === 'write') return;
    this.selected = label;
    markSelected(this.root, label);
    setNotice(this.root, null);
    setSubmitEnabled(this.root, true);
  }

  private onKey(ev: KeyboardEvent): void {
    if (!this.pending || this.pending.kind === 'write') return;
    const index = Number(ev.key) - 1;
    if (index >= 0 && index < this.labels.length) this.choose(this.labels[index]);
  }

  private validateWrite(): void {
    if (!this.pending || this.pending.kind !== 'write') return;
    const premise = squash(this.pending.payload.premise_text);
    const values = writeFieldValues(this.root);
    const missing = this.writeFields.some((f) => !(values[f] ?? '').trim());
    const echoes = this.writeFields.some((f) => squash(values[f] ?? '') === premise);
    if (missing) {
      setNotice(this.root, 'All three sentences are required.');
    } else if (echoes) {
      setNotice(this.root, 'A sentence may not repeat the premise.');
    } else {
      setNotice(this.root, null);
    }
    setSubmitEnabled(this.root, !missing && !echoes);
  }

  private response(): Record<string, string> | null {
    if (!this.pending) return null;
    if (this.pending.kind === 'write') {
      const values = writeFieldValues(this.root);
      const out: Record<string, string> = {};
      for (const field of this.writeFields) {
        const text = (values[field] ?? '').trim();
        if (!text) return null;
        out[field] = text;
      }
      return out;
    }
    return this.selected === null ? null : { label: this.selected };
  }

  private async submitPending(): Promise<void> {
    const task = this.pending;
    const response = this.response();
    if (!task || response === null) return;
    const key = `${this.opts.workerId}:${task.task_id}`;
    setSubmitEnabled(this.root, false);
    try {
      await this.client.submitResponse(task.task_id, response, key);
      clearBanner(this.root);
      this.completed += 1;
      await this.advance();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // someone (or a previous session) already answered this task
        showBanner(this.root, 'Already answered; fetching the next task.');
        await this.advance();
      } else if (err instanceof ApiError && err.status === 412) {
        showBanner(this.root, 'Your lease on this task expired; fetching it again.');
        await this.advance();
      } else if (err instanceof ApiError) {
        // validation rejected the response; keep it on screen for editing
        setNotice(this.root, err.message);
        setSubmitEnabled(this.root, true);
      } else {
        // network failure: the response stays as entered, submit retries
        showBanner(this.root, 'Network error; your response is kept. Submit to retry.');
        setSubmitEnabled(this.root, true);
      }
    }
  }
}
