// Browse: domain groups -> journal list -> issues and articles with their
// availability icons, plus the search box (titles and authors only).

import type { ArticleRow, DomainGroup, IssuesResponse, SearchHit } from '../api';
import { renderIcon } from '../icons';
import type { Session } from '../state';
import { startRequestFlow } from './request';

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

export function renderArticleRow(session: Session, article: ArticleRow): HTMLLIElement {
  const li = el('li', undefined, 'article-row');
  const icon = renderIcon(article.icon);
  li.append(icon);
  const title = el('span', article.title, 'article-title');
  li.append(title);
  li.append(
    el(
      'span',
      ` ${article.authors.join('; ')} (pp. ${article.pages.first}-${article.pages.last}) `,
      'article-meta'
    )
  );
  const button = el('button', 'Request', 'request-button');
  button.dataset.articleKey = article.key;
  if (article.icon === 'Unavailable') {
    // clicking an unavailable icon is inert: no handler, disabled control
    button.disabled = true;
  } else {
    button.addEventListener('click', () => startRequestFlow(session, article.key, li));
  }
  li.append(button);
  return li;
}

export function renderIssues(session: Session, data: IssuesResponse): HTMLElement {
  const section = el('section', undefined, 'issues');
  section.append(el('h3', data.journal ?? data.issn));
  if (data.issues.length === 0) {
    section.append(el('p', 'No issues stored yet.'));
    return section;
  }
  for (const issue of data.issues) {
    const block = el('div', undefined, 'issue');
    block.append(el('h4', `Volume ${issue.volume}, issue ${issue.issue} (${issue.date})`));
    const list = el('ul');
    for (const article of issue.articles) {
      list.append(renderArticleRow(session, article));
    }
    block.append(list);
    section.append(block);
  }
  return section;
}

export function renderJournalGroups(
  groups: DomainGroup[],
  onPick: (issn: string) => void
): HTMLElement {
  const section = el('section', undefined, 'journals');
  for (const group of groups) {
    section.append(el('h3', group.domain, 'domain-heading'));
    const list = el('ul');
    for (const journal of group.journals) {
      const li = el('li');
      const link = el('a', journal.title);
      link.href = `#/browse/${journal.issn}`;
      link.addEventListener('click', (ev) => {
        ev.preventDefault();
        onPick(journal.issn);
      });
      li.append(link, el('span', ` ${journal.issn}`, 'issn'));
      list.append(li);
    }
    section.append(list);
  }
  return section;
}

export function renderSearchResults(hits: SearchHit[]): HTMLElement {
  const section = el('section', undefined, 'search-results');
  if (hits.length === 0) {
    section.append(el('p', 'Nothing matched. Queries cover titles and author names.'));
    return section;
  }
  const list = el('ul');
  for (const hit of hits) {
    const li = el('li');
    li.append(el('strong', hit.article_title));
    li.append(el('span', ` ${hit.authors.join('; ')} `, 'article-meta'));
    li.append(el('em', hit.journal_title));
    li.dataset.articleKey = hit.article_key;
    list.append(li);
  }
  section.append(list);
  return section;
}

export async function mountBrowse(session: Session, root: HTMLElement): Promise<void> {
  root.replaceChildren(el('p', 'Loading journals...'));
  const detail = el('div', undefined, 'journal-detail');
  try {
    const groups = await session.client.listJournals();
    const picker = renderJournalGroups(groups, async (issn) => {
      detail.replaceChildren(el('p', 'Loading issues...'));
      try {
        const issues = await session.client.listIssues(issn, session.category);
        detail.replaceChildren(renderIssues(session, issues));
      } catch (err) {
        detail.replaceChildren(el('p', String(err), 'error'));
      }
    });
    root.replaceChildren(picker, detail);
  } catch (err) {
    root.replaceChildren(el('p', String(err), 'error'));
  }
}
