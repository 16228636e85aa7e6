// Administrator screens: summary correction, the manual job queue, the
// statistics table with CSV download, digest trigger. Everything here is
// gated on the bearer token, which is asked for once and kept in memory.
// (Consortium configuration itself is a server-side file read at startup;
// there is no editing endpoint, so none is offered here.)

import { parseCsv } from '../api';
import type { JobRow } from '../api';
import type { Session } from '../state';

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  text?: string,
  className?: string
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (text !== undefined) node.textContent = text;
  if (className) node.className = className;
  return node;
}

export function renderTokenPrompt(session: Session, onUnlocked: () => void): HTMLElement {
  const form = el('form', undefined, 'token-prompt');
  form.append(el('p', 'Administration requires the admin token.'));
  const input = el('input');
  input.type = 'password';
  input.placeholder = 'admin token';
  const submit = el('button', 'Unlock');
  submit.type = 'submit';
  form.append(input, submit);
  form.addEventListener('submit', (ev) => {
    ev.preventDefault();
    if (input.value) {
      session.client.setAdminToken(input.value);
      onUnlocked();
    }
  });
  return form;
}

function summaryCorrectionForm(session: Session): HTMLElement {
  const box = el('section', undefined, 'admin-correct');
  box.append(el('h3', 'Correct a summary'));
  const form = el('form');
  const keyInput = el('input');
  keyInput.placeholder = 'summary key, e.g. 1000-0003:v12:i1';
  const seqInput = el('input');
  seqInput.placeholder = 'article seq';
  seqInput.type = 'number';
  const titleInput = el('input');
  titleInput.placeholder = 'corrected title';
  const submit = el('button', 'Apply');
  submit.type = 'submit';
  const status = el('p');
  form.append(keyInput, seqInput, titleInput, submit);
  form.addEventListener('submit', async (ev) => {
    ev.preventDefault();
    try {
      await session.client.patchSummary(keyInput.value, {
        articles: [{ seq: Number(seqInput.value), title: titleInput.value }],
      });
      status.textContent = 'Corrected.';
    } catch (err) {
      status.textContent = String(err);
    }
  });
  box.append(form, status);
  return box;
}

export function renderJobRow(
  session: Session,
  docserverUrl: string,
  job: JobRow,
  onDone: () => void
): HTMLTableRowElement {
  const tr = el('tr');
  tr.dataset.jobId = job.id;
  tr.append(el('td', job.id));
  tr.append(el('td', job.kind === 'mail' ? 'photocopy / mail' : 'print'));
  tr.append(el('td', job.article_key));
  tr.append(el('td', job.state));
  const action = el('td');
  if (job.state === 'queued') {
    const button = el('button', job.needs_digitalization ? 'Scan and print' : 'Complete');
    button.addEventListener('click', async () => {
      await session.client.completeJob(docserverUrl, job);
      onDone();
    });
    action.append(button);
  } else {
    action.textContent = job.detail;
  }
  tr.append(action);
  return tr;
}

function jobQueue(session: Session): HTMLElement {
  const box = el('section', undefined, 'admin-jobs');
  box.append(el('h3', 'Manual job queue'));
  const table = el('table');
  const refresh = el('button', 'Refresh');

  async function load(): Promise<void> {
    table.replaceChildren();
    const header = el('tr');
    for (const h of ['job', 'kind', 'article', 'state', 'action']) {
      header.append(el('th', h));
    }
    table.append(header);
    for (const url of session.docserverUrls) {
      const jobs = await session.client.listJobs(url).catch(() => [] as JobRow[]);
      for (const job of jobs) {
        table.append(renderJobRow(session, url, job, () => void load()));
      }
    }
  }

  refresh.addEventListener('click', () => void load());
  box.append(refresh, table);
  void load();
  return box;
}

function statsPanel(session: Session): HTMLElement {
  const box = el('section', undefined, 'admin-stats');
  box.append(el('h3', 'Usage statistics'));
  const start = el('input');
  start.value = '2000-01-01T00:00:00+00:00';
  const end = el('input');
  end.value = '2100-01-01T00:00:00+00:00';
  const load = el('button', 'Load');
  const download = el('a', 'Download CSV');
  const table = el('table', undefined, 'stats-table');
  box.append(start, end, load, download, table);
  load.addEventListener('click', async () => {
    const text = await session.client.statsExport(start.value, end.value);
    const rows = parseCsv(text);
    table.replaceChildren();
    for (const [i, row] of rows.entries()) {
      const tr = el('tr');
      for (const cell of row) {
        tr.append(el(i === 0 ? 'th' : 'td', cell));
      }
      table.append(tr);
    }
    download.href = URL.createObjectURL(new Blob([text], { type: 'text/csv' }));
    download.setAttribute('download', 'stats.csv');
  });
  return box;
}

function digestPanel(session: Session): HTMLElement {
  const box = el('section', undefined, 'admin-digest');
  box.append(el('h3', 'Alert digests'));
  const run = el('button', 'Run digest now');
  const status = el('p');
  run.addEventListener('click', async () => {
    try {
      const result = (await session.client.runDigest()) as { messages: unknown[] };
      status.textContent = `Digest sent ${result.messages.length} message(s).`;
    } catch (err) {
      status.textContent = String(err);
    }
  });
  box.append(run, status);
  return box;
}

export function mountAdmin(session: Session, root: HTMLElement): void {
  if (!session.client.hasAdminToken()) {
    root.replaceChildren(renderTokenPrompt(session, () => mountAdmin(session, root)));
    return;
  }
  root.replaceChildren(
    el('h2', 'Administration'),
    summaryCorrectionForm(session),
    jobQueue(session),
    statsPanel(session),
    digestPanel(session)
  );
}
