// Boot: one consultation wizard plus the tree inspector, both fed only by
// service responses. Configure the backend with ?api=http://host:port
// (defaults to same origin).

import { Client } from './api';
import { edgeCount, nodeCount, pathIndexes, renderReport, renderTree } from './inspector';
import { renderWizard } from './render';
import { ConsultationStore } from './store';
import type { CompiledTreeDto } from './types';

const params = new URLSearchParams(window.location.search);
const base = params.get('api') ?? '';
const client = new Client(base);
const store = new ConsultationStore(client, window.sessionStorage);

const wizardEl = document.getElementById('wizard')!;
const treeEl = document.getElementById('tree')!;
const reportEl = document.getElementById('report')!;
const titleEl = document.getElementById('title')!;

let tree: CompiledTreeDto | null = null;

function redraw(): void {
  const state = store.snapshot();
  wizardEl.innerHTML = renderWizard(state);
  if (tree) {
    treeEl.innerHTML = renderTree(tree, pathIndexes(tree, state.breadcrumb));
  }
}

wizardEl.addEventListener('click', (event) => {
  const target = (event.target as HTMLElement).closest('[data-action]');
  if (!target) return;
  const action = target.getAttribute('data-action');
  if (action === 'answer-yes') void store.answer('yes');
  else if (action === 'answer-no') void store.answer('no');
  else if (action === 'undo') void store.undo();
  else if (action === 'restart') void store.restart();
  else if (action === 'retry') void store.init();
});

store.subscribe(redraw);

async function boot(): Promise<void> {
  try {
    const response = await client.tree();
    tree = response.tree;
    titleEl.textContent = response.tree.source_title;
    const parity =
      nodeCount(tree) === response.stats.internal + response.stats.leaves &&
      edgeCount(tree) === nodeCount(tree) - 1;
    if (!parity) {
      reportEl.innerHTML = '<p class="error">Tree stats disagree with the rendered tree.</p>';
    }
  } catch (err) {
    treeEl.innerHTML = `<p class="error">Cannot load the tree: ${String(err)}</p>`;
  }
  redraw();
  void store.init();
  try {
    const report = await client.check();
    reportEl.innerHTML = renderReport(report);
  } catch (err) {
    reportEl.innerHTML = `<p class="error">Audit unavailable: ${String(err)}</p>`;
  }
}

void boot();
