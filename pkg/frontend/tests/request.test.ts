import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';

import { POLL_INTERVAL_MS } from '../src/poll';
import { createSession } from '../src/state';
import { startRequestFlow, renderOutcome } from '../src/views/request';
import { jsonResponse, makeFetch } from './helpers';

function outcomeBody(status: 'ready' | 'deferred', locator: string | null = null) {
  return {
    request_id: 'req-1',
    article_key: '3000-0009:v12:i3:a1',
    status,
    plan: { mode: 'PhotocopyPostalMail', source_institution: 'inst-c' },
    locator,
    message: status === 'ready' ? 'article delivered: photocopy mailed' : 'queued for photocopy',
    job_id: 'job-1',
    job_institution: 'inst-c',
  };
}

describe('request flow', () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it('ready outcomes render an immediate download link', () => {
    const node = renderOutcome(
      outcomeBody('ready', 'http://doc-a/documents/k') as never
    );
    const link = node.querySelector('a') as HTMLAnchorElement;
    expect(link.href).toBe('http://doc-a/documents/k');
    expect(node.className).toContain('ready');
  });

  it('deferred requests show the banner, then flip when the job completes', async () => {
    let jobDone = false;
    const { fetchFn } = makeFetch({
      'POST /requests': () => outcomeBody('deferred'),
      'GET /requests/req-1': () => outcomeBody(jobDone ? 'ready' : 'deferred'),
    });
    const session = createSession('http://gw', fetchFn);
    const container = document.createElement('div');
    startRequestFlow(session, '3000-0009:v12:i3:a1', container);
    await vi.waitFor(() => {
      expect(container.querySelector('.request-banner.deferred')).not.toBeNull();
    });

    // two polls while the operator has not photocopied yet
    await vi.advanceTimersByTimeAsync(POLL_INTERVAL_MS * 2);
    expect(container.querySelector('.request-banner.deferred')).not.toBeNull();

    // the operator completes the job; the very next poll flips the banner
    jobDone = true;
    await vi.advanceTimersByTimeAsync(POLL_INTERVAL_MS);
    expect(container.querySelector('.request-banner.ready')).not.toBeNull();
    expect(container.textContent).toContain('photocopy mailed');
  });

  it('rights-denied answers render the error state', async () => {
    const { fetchFn } = makeFetch({
      'POST /requests': () => jsonResponse({ error: 'RightsDenied', detail: 'category may not' }, 403),
    });
    const session = createSession('http://gw', fetchFn);
    const container = document.createElement('div');
    startRequestFlow(session, 'k', container);
    await vi.waitFor(() => {
      expect(container.querySelector('.request-banner.error')).not.toBeNull();
    });
    expect(container.textContent).toContain('RightsDenied');
  });
});
