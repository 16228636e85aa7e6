// Request flow: fire the request, then either show the download link
// straight away or a deferred banner that polling flips to ready.

import { ApiError } from '../api';
import type { RequestOutcome } from '../api';
import { pollRequest } from '../poll';
import type { Session } from '../state';

function banner(className: string): HTMLDivElement {
  const div = document.createElement('div');
  div.className = `request-banner ${className}`;
  return div;
}

export function renderOutcome(outcome: RequestOutcome): HTMLDivElement {
  if (outcome.status === 'ready' && outcome.locator) {
    const div = banner('ready');
    const link = document.createElement('a');
    link.href = outcome.locator;
    link.textContent = 'Download the article';
    div.append(link);
    return div;
  }
  if (outcome.status === 'ready') {
    const div = banner('ready');
    div.textContent = outcome.message || 'Delivered.';
    return div;
  }
  const div = banner('deferred');
  div.textContent =
    outcome.message || 'Request accepted; you will be advised when the article is available.';
  return div;
}

export function startRequestFlow(
  session: Session,
  articleKey: string,
  container: HTMLElement
): void {
  const slot = document.createElement('div');
  slot.className = 'request-slot';
  container.append(slot);
  session.client
    .createRequest(articleKey, session.category, session.email || undefined)
    .then((outcome) => {
      slot.replaceChildren(renderOutcome(outcome));
      if (outcome.status === 'deferred') {
        pollRequest(session.client, outcome.request_id, (polled) => {
          slot.replaceChildren(renderOutcome(polled));
        });
      }
    })
    .catch((err) => {
      const div = banner('error');
      div.textContent =
        err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
      slot.replaceChildren(div);
    });
}
