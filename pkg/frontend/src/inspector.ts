// Tree inspector: a collapsible top-down rendering of the compiled tree
// (yes branch first, i.e. on top/left) with the live session path
// highlighted, plus the audit report. Counting helpers are exported so
// tests can assert parity with the stats the service reports.

import { escapeHtml } from './render';
import type {
  AnalysisReportDto,
  Answer,
  CompiledTreeDto,
  ReplayStep,
} from './types';

export function nodeCount(tree: CompiledTreeDto): number {
  return tree.nodes.length;
}

export function edgeCount(tree: CompiledTreeDto): number {
  return tree.nodes.reduce((total, node) => total + (node.type === 'test' ? 2 : 0), 0);
}

export function internalCount(tree: CompiledTreeDto): number {
  return tree.nodes.filter((n) => n.type === 'test').length;
}

export function leafCount(tree: CompiledTreeDto): number {
  return tree.nodes.filter((n) => n.type === 'leaf').length;
}

export function depthOf(tree: CompiledTreeDto, index = tree.root): number {
  const node = tree.nodes[index];
  if (!node || node.type === 'leaf') return 0;
  return 1 + Math.max(depthOf(tree, node.yes), depthOf(tree, node.no));
}

function questionOf(tree: CompiledTreeDto, predicate: string, value: Answer): string {
  const pred = tree.predicates.find((p) => p.id === predicate);
  if (!pred) return `${predicate} = ${String(value)}?`;
  if (pred.domain.type === 'bool') return pred.prompt;
  return `${pred.prompt.replace(/\?\s*$/, '')}: ${String(value)}?`;
}

function consequenceText(tree: CompiledTreeDto, id: string): string {
  const consequence = tree.consequences.find((c) => c.id === id);
  if (consequence) return consequence.text;
  return id === 'UNREGULATED' ? 'No applicable rule' : id;
}

/** Node indexes visited by a breadcrumb walk from the root, cursor included. */
export function pathIndexes(tree: CompiledTreeDto, walk: ReplayStep[]): Set<number> {
  const visited = new Set<number>([tree.root]);
  let cursor = tree.root;
  for (const step of walk) {
    const node = tree.nodes[cursor];
    if (!node || node.type !== 'test') break;
    if (node.predicate !== step.predicate || node.value !== step.value) break;
    cursor = step.reply === 'yes' ? node.yes : node.no;
    visited.add(cursor);
  }
  return visited;
}

export function renderTree(tree: CompiledTreeDto, onPath: Set<number>): string {
  function render(index: number, edge: 'yes' | 'no' | null): string {
    const node = tree.nodes[index];
    if (!node) return '';
    const highlight = onPath.has(index) ? ' on-path' : '';
    const badge = edge === null ? '' : `<span class="edge edge-${edge}">${edge}</span> `;
    if (node.type === 'leaf') {
      return (
        `<li class="leaf${highlight}" data-node="${index}">` +
        `${badge}<span class="leaf-text">${escapeHtml(consequenceText(tree, node.consequence))}</span></li>`
      );
    }
    const label = escapeHtml(questionOf(tree, node.predicate, node.value));
    const open = onPath.has(index) ? ' open' : '';
    return (
      `<li class="test${highlight}" data-node="${index}">` +
      `<details${open}><summary>${badge}${label}</summary>` +
      `<ul>${render(node.yes, 'yes')}${render(node.no, 'no')}</ul>` +
      `</details></li>`
    );
  }
  return `<ul class="tree" data-testid="tree">${render(tree.root, null)}</ul>`;
}

function facts(witness: Record<string, Answer>): string {
  return Object.entries(witness)
    .map(([key, value]) =>
      `${escapeHtml(key)} = ${escapeHtml(value === true ? 'yes' : value === false ? 'no' : String(value))}`)
    .join(', ');
}

export function renderReport(report: AnalysisReportDto): string {
  const sections: string[] = [];
  if (report.conflicts.length === 0) {
    sections.push('<p class="all-clear" data-testid="no-conflicts">No contradictions found.</p>');
  } else {
    const rows = report.conflicts
      .map(
        (c) =>
          `<li><strong>${c.norms.map(escapeHtml).join(' vs ')}</strong>` +
          `<br>witness: ${facts(c.witness)}</li>`,
      )
      .join('');
    sections.push(
      `<div class="conflicts" data-testid="conflicts"><h4>Contradictions (${report.conflicts.length})</h4>` +
        `<ul>${rows}</ul></div>`,
    );
  }
  if (report.shadowed.length > 0) {
    sections.push(
      `<p class="shadowed">Never-winning rules: ${report.shadowed.map(escapeHtml).join(', ')}</p>`,
    );
  }
  if (report.unregulated_regions.length > 0) {
    const rows = report.unregulated_regions
      .map((region) => `<li>${facts(region) || 'every assignment'}</li>`)
      .join('');
    sections.push(`<div class="gaps"><h4>Unregulated regions</h4><ul>${rows}</ul></div>`);
  }
  sections.push(
    `<p class="muted">${report.stats.internal} questions, ${report.stats.leaves} outcomes, ` +
      `depth ${report.stats.depth}; ${report.assignments_checked} assignments checked.</p>`,
  );
  return sections.join('\n');
}
