// Entry point: hash routing between the reader views and administration.

import './styles.css';
import type { SearchHit } from './api';
import { createSession } from './state';
import { mountAdmin } from './views/admin';
import { mountAlerts } from './views/alerts';
import { mountBrowse, renderSearchResults } from './views/browse';

const BASE_URL = import.meta.env.VITE_GATEWAY_URL ?? 'http://127.0.0.1:8600';
const DOCSERVERS = (import.meta.env.VITE_DOCSERVER_URLS ?? '')
  .split(',')
  .map((s: string) => s.trim())
  .filter((s: string) => s.length > 0);

const session = createSession(BASE_URL);
session.docserverUrls = DOCSERVERS;

function nav(): HTMLElement {
  const bar = document.createElement('nav');
  for (const [href, label] of [
    ['#/browse', 'Browse'],
    ['#/search', 'Search'],
    ['#/alerts', 'Alerts'],
    ['#/admin', 'Administration'],
  ]) {
    const a = document.createElement('a');
    a.href = href;
    a.textContent = label;
    bar.append(a);
  }
  const category = document.createElement('select');
  for (const c of ['researcher', 'student', 'visitor']) {
    const option = document.createElement('option');
    option.value = c;
    option.textContent = c;
    category.append(option);
  }
  category.addEventListener('change', () => {
    session.category = category.value;
  });
  bar.append(category);
  return bar;
}

function mountSearch(root: HTMLElement): void {
  const form = document.createElement('form');
  const input = document.createElement('input');
  input.type = 'search';
  input.placeholder = 'title or author words';
  const button = document.createElement('button');
  button.type = 'submit';
  button.textContent = 'Search';
  form.append(input, button);
  const results = document.createElement('div');
  form.addEventListener('submit', async (ev) => {
    ev.preventDefault();
    const hits: SearchHit[] = await session.client.search(input.value, session.category);
    results.replaceChildren(renderSearchResults(hits));
  });
  root.replaceChildren(form, results);
}

function route(): void {
  const root = document.getElementById('view');
  if (!root) return;
  const hash = window.location.hash || '#/browse';
  if (hash.startsWith('#/admin')) {
    mountAdmin(session, root);
  } else if (hash.startsWith('#/alerts')) {
    void mountAlerts(session, root);
  } else if (hash.startsWith('#/search')) {
    mountSearch(root);
  } else {
    void mountBrowse(session, root);
  }
}

export function boot(): void {
  const app = document.getElementById('app');
  if (!app) return;
  const header = document.createElement('header');
  const h1 = document.createElement('h1');
  h1.textContent = 'Consortium document gateway';
  header.append(h1, nav());
  const view = document.createElement('main');
  view.id = 'view';
  app.replaceChildren(header, view);
  window.addEventListener('hashchange', route);
  route();
}

if (!import.meta.env.VITEST) {
  boot();
}
