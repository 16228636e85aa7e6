// Availability icon rendering: a pure function of the server-sent state.
// The UI never computes delivery modes itself; whatever state the summary
// server annotated is what gets drawn.

import type { IconState } from './api';

export interface IconSpec {
  glyph: string;
  label: string;
  cssClass: string;
  requestable: boolean;
}

const SPECS: Record<IconState, IconSpec> = {
  ElectronicLocal: {
    glyph: '↓', // downwards arrow: straight to the workstation
    label: 'Electronic, on your workstation',
    cssClass: 'icon-electronic',
    requestable: true,
  },
  CachedFast: {
    glyph: '⚡', // high voltage: already on the local server
    label: 'Electronic, fast (already on site)',
    cssClass: 'icon-cached',
    requestable: true,
  },
  PaperShared: {
    glyph: '⎙', // print screen symbol: printed at your site
    label: 'Paper, printed at your institution',
    cssClass: 'icon-paper',
    requestable: true,
  },
  MailOnly: {
    glyph: '✉', // envelope: photocopy by post
    label: 'Paper, photocopy by postal mail',
    cssClass: 'icon-mail',
    requestable: true,
  },
  Unavailable: {
    glyph: '✖', // heavy multiplication x
    label: 'Not available through the consortium',
    cssClass: 'icon-unavailable',
    requestable: false,
  },
};

export function iconFor(state: IconState): IconSpec {
  return SPECS[state];
}

export function renderIcon(state: IconState): HTMLSpanElement {
  const spec = iconFor(state);
  const span = document.createElement('span');
  span.className = `icon ${spec.cssClass}`;
  span.textContent = spec.glyph;
  span.title = spec.label;
  span.setAttribute('role', 'img');
  span.setAttribute('aria-label', spec.label);
  span.dataset.state = state;
  return span;
}
