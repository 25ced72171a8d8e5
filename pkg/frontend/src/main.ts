// Boot: join form -> worker registration -> task loop. The client is
// served by the annotation service itself, so the API base is the page
// origin. The worker token lives in sessionStorage so a reload resumes
// the same identity instead of minting a new worker.

import { ApiClient } from './api.js';
import { App } from './app.js';

function renderJoinForm(root: HTMLElement, onJoin: (batch: string, name: string) => void): void {
  root.innerHTML = `
    <section class="join-card">
      <h2>Join a batch</h2>
      <label>Batch id <input type="text" name="batch" autocomplete="off"></label>
      <label>Display name <input type="text" name="name" autocomplete="off"></label>
      <button type="button" class="join">Start</button>
      <p class="notice" hidden></p>
    </section>
  `;
  const batch = root.querySelector<HTMLInputElement>('input[name=batch]')!;
  const name = root.querySelector<HTMLInputElement>('input[name=name]')!;
  root.querySelector('.join')!.addEventListener('click', () => {
    if (!batch.value.trim()) {
      const notice = root.querySelector<HTMLElement>('.notice')!;
      notice.hidden = false;
      notice.textContent = 'A batch id is required.';
      return;
    }
    onJoin(batch.value.trim(), name.value.trim());
  });
}

async function boot(): Promise<void> {
  const root = document.getElementById('app');
  if (!root) return;
  const client = new ApiClient('');
  const params = new URLSearchParams(window.location.search);

  const begin = async (batchId: string, name: string) => {
    let workerId = sessionStorage.getItem('labelui.worker') ?? '';
    let token = sessionStorage.getItem('labelui.token') ?? '';
    if (!workerId || !token) {
      const registered = await client.register(name);
      workerId = registered.worker_id;
      token = registered.token;
      sessionStorage.setItem('labelui.worker', workerId);
      sessionStorage.setItem('labelui.token', token);
    }
    client.setToken(token);
    const app = new App(root, client, { workerId, batchId });
    await app.start();
  };

  const batchParam = params.get('batch');
  if (batchParam) {
    await begin(batchParam, params.get('name') ?? '');
  } else {
    renderJoinForm(root, (batchId, name) => void begin(batchId, name));
  }
}

void boot();
