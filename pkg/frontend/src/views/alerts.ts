// Alert manager: subscribe an e-mail address to any registered titles
// (including journals nobody subscribes to institutionally), list, delete.

import type { Session } from '../state';

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  text?: string
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (text !== undefined) node.textContent = text;
  return node;
}

export async function mountAlerts(session: Session, root: HTMLElement): Promise<void> {
  root.replaceChildren(el('p', 'Loading titles...'));
  const groups = await session.client.listJournals().catch(() => []);
  const titles = new Map<string, string>();
  for (const g of groups) {
    for (const j of g.journals) titles.set(j.issn, j.title);
  }

  const form = el('form');
  form.className = 'alert-form';
  const emailInput = el('input');
  emailInput.type = 'email';
  emailInput.placeholder = 'you@example.org';
  emailInput.value = session.email;
  emailInput.required = true;
  const picker = el('select');
  picker.multiple = true;
  picker.size = Math.min(8, Math.max(titles.size, 2));
  for (const [issn, title] of titles) {
    const option = el('option', `${title} (${issn})`);
    option.value = issn;
    picker.append(option);
  }
  const submit = el('button', 'Subscribe');
  submit.type = 'submit';
  form.append(emailInput, picker, submit);

  const listBox = el('div');
  listBox.className = 'alert-list';
  const status = el('p');

  async function refresh(): Promise<void> {
    if (!emailInput.value) {
      listBox.replaceChildren();
      return;
    }
    const subs = await session.client.listAlerts(emailInput.value).catch(() => []);
    const ul = el('ul');
    for (const sub of subs) {
      const li = el('li');
      li.dataset.subscriptionId = sub.id;
      li.append(
        el('span', sub.issns.map((i) => titles.get(i) ?? i).join(', '))
      );
      const remove = el('button', 'Unsubscribe');
      remove.type = 'button';
      remove.addEventListener('click', async () => {
        await session.client.deleteAlert(sub.id);
        await refresh();
      });
      li.append(remove);
      ul.append(li);
    }
    listBox.replaceChildren(el('h3', 'Active subscriptions'), ul);
  }

  form.addEventListener('submit', async (ev) => {
    ev.preventDefault();
    const chosen = Array.from(picker.selectedOptions).map((o) => o.value);
    session.email = emailInput.value;
    try {
      await session.client.createAlert(emailInput.value, chosen);
      status.textContent = 'Subscribed.';
      await refresh();
    } catch (err) {
      status.textContent = String(err);
    }
  });
  emailInput.addEventListener('change', () => void refresh());

  root.replaceChildren(el('h2', 'Alert subscriptions'), form, status, listBox);
  await refresh();
}
