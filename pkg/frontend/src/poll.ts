// Deferred-request polling at a fixed interval.

import type { GatewayClient, RequestOutcome } from './api';

export const POLL_INTERVAL_MS = 2000;

export interface PollHandle {
  stop(): void;
}

// Polls until the request leaves the deferred state, reporting every
// observed outcome. The first probe happens one interval after start, so a
// job completed at t flips the view by t + one interval at the latest.
export function pollRequest(
  client: GatewayClient,
  requestId: string,
  onUpdate: (outcome: RequestOutcome) => void,
  onError: (err: unknown) => void = () => undefined,
  intervalMs: number = POLL_INTERVAL_MS
): PollHandle {
  let stopped = false;
  let timer: ReturnType<typeof setTimeout> | null = null;

  const tick = async (): Promise<void> => {
    if (stopped) return;
    try {
      const outcome = await client.requestStatus(requestId);
      if (stopped) return;
      onUpdate(outcome);
      if (outcome.status !== 'deferred') {
        return;
      }
    } catch (err) {
      if (stopped) return;
      onError(err);
    }
    timer = setTimeout(tick, intervalMs);
  };

  timer = setTimeout(tick, intervalMs);
  return {
    stop() {
      stopped = true;
      if (timer !== null) clearTimeout(timer);
    },
  };
}
