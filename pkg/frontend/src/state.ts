// Session state. The admin token lives in memory only: entered once,
// gone when the tab closes.

import { GatewayClient } from './api';

export interface Session {
  client: GatewayClient;
  category: string;
  email: string;
  docserverUrls: string[];
}

export function createSession(baseUrl: string, fetchFn?: typeof fetch): Session {
  return {
    client: new GatewayClient(baseUrl, null, fetchFn),
    category: 'researcher',
    email: '',
    docserverUrls: [],
  };
}
