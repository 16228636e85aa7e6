import { describe, expect, it, vi } from 'vitest';

import type { JobRow } from '../src/api';
import { createSession } from '../src/state';
import { mountAdmin, renderJobRow } from '../src/views/admin';
import { makeFetch } from './helpers';

describe('administration screens', () => {
  it('are unreachable without the token: only the prompt renders, nothing is fetched', () => {
    const { fetchFn, calls } = makeFetch({});
    const session = createSession('http://gw', fetchFn);
    const root = document.createElement('div');
    mountAdmin(session, root);
    expect(root.querySelector('.token-prompt')).not.toBeNull();
    expect(root.querySelector('.admin-jobs')).toBeNull();
    expect(root.querySelector('.admin-stats')).toBeNull();
    expect(calls).toHaveLength(0);
  });

  it('unlock with a token mounts the admin panels', async () => {
    const { fetchFn } = makeFetch({
      'GET /jobs': () => ({ jobs: [] }),
    });
    const session = createSession('http://gw', fetchFn);
    session.docserverUrls = ['http://doc-a'];
    const root = document.createElement('div');
    mountAdmin(session, root);
    const input = root.querySelector('input[type=password]') as HTMLInputElement;
    input.value = 'demo-admin-token';
    (root.querySelector('form') as HTMLFormElement).dispatchEvent(
      new Event('submit', { bubbles: true, cancelable: true })
    );
    await vi.waitFor(() => {
      expect(root.querySelector('.admin-jobs')).not.toBeNull();
    });
    expect(root.querySelector('.admin-correct')).not.toBeNull();
    expect(root.querySelector('.admin-stats')).not.toBeNull();
    expect(session.client.hasAdminToken()).toBe(true);
  });

  it('job rows expose a completion action for queued manual jobs', async () => {
    const job: JobRow = {
      id: 'job-7',
      kind: 'mail',
      article_key: '3000-0009:v12:i3:a1',
      state: 'queued',
      needs_digitalization: false,
      printer_id: null,
      postal_address: '4 Delta Esplanade',
      detail: '',
    };
    const { fetchFn, calls } = makeFetch({
      'POST /mail-jobs/job-7/complete': () => ({ ...job, state: 'done', detail: 'mailed' }),
    });
    const session = createSession('http://gw', fetchFn);
    let refreshed = false;
    const row = renderJobRow(session, 'http://doc-c', job, () => {
      refreshed = true;
    });
    (row.querySelector('button') as HTMLButtonElement).click();
    await vi.waitFor(() => expect(refreshed).toBe(true));
    expect(calls[0].url).toBe('http://doc-c/mail-jobs/job-7/complete');
    expect(calls[0].method).toBe('POST');
  });

  it('done jobs show their detail instead of an action', () => {
    const job: JobRow = {
      id: 'job-8',
      kind: 'print',
      article_key: '2000-0006:v5:i2:a1',
      state: 'done',
      needs_digitalization: true,
      printer_id: 'prt-d1',
      postal_address: null,
      detail: 'printed on prt-d1',
    };
    const { fetchFn } = makeFetch({});
    const session = createSession('http://gw', fetchFn);
    const row = renderJobRow(session, 'http://doc-b', job, () => undefined);
    expect(row.querySelector('button')).toBeNull();
    expect(row.textContent).toContain('printed on prt-d1');
  });
});
