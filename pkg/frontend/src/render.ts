// Pure view functions: state in, HTML string out. The DOM wiring in main.ts
// stays a thin event-delegation shim, so everything visible is testable
// without a browser. No legal outcome is ever computed here; every
// consequence string shown comes from a service response.

import type { WizardState } from './store';
import type { PreviewDto, TraceDto } from './types';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function previewHint(preview: PreviewDto | null): string {
  if (!preview) return '';
  const text =
    preview.kind === 'question' ? `next: ${preview.prompt}` : `outcome: ${preview.text}`;
  return `<span class="preview">${escapeHtml(text)}</span>`;
}

function answerWord(value: unknown): string {
  if (value === true) return 'yes';
  if (value === false) return 'no';
  return String(value);
}

export function renderBreadcrumb(state: WizardState): string {
  if (state.breadcrumb.length === 0) {
    return '<ol class="breadcrumb" data-testid="breadcrumb"></ol>';
  }
  const items = state.breadcrumb
    .map(
      (step) =>
        `<li>${escapeHtml(step.prompt)} <strong>${step.reply}</strong></li>`,
    )
    .join('');
  return `<ol class="breadcrumb" data-testid="breadcrumb">${items}</ol>`;
}

export function renderTrace(trace: TraceDto): string {
  const steps = trace.steps
    .map((s) => `<li>${escapeHtml(s.prompt)} <strong>${s.answer}</strong></li>`)
    .join('');
  return `<ol class="trace">${steps}</ol>`;
}

export function renderWizard(state: WizardState): string {
  if (state.phase === 'loading') {
    return '<p class="muted">Connecting to the consultation service…</p>';
  }
  const errorBox = state.error
    ? `<div class="error" role="alert">${escapeHtml(state.error)} ` +
      '<button data-action="retry">Retry</button></div>'
    : '';
  if (state.phase === 'error') {
    return errorBox || '<div class="error">Something went wrong.</div>';
  }
  const status = state.status;
  if (!status) return errorBox;

  if (status.state === 'done') {
    return `
      ${errorBox}
      <div class="outcome-card" data-testid="outcome">
        <h3>Outcome</h3>
        <p class="outcome-text">${escapeHtml(status.outcome.text)}</p>
        <h4>How we got here</h4>
        ${renderTrace(status.trace)}
        <button data-action="restart">Start over</button>
      </div>
      ${renderBreadcrumb(state)}
    `;
  }

  const disabled = state.busy ? ' disabled' : '';
  const undoDisabled = state.busy || state.breadcrumb.length === 0 ? ' disabled' : '';
  return `
    ${errorBox}
    <div class="question-card" data-testid="question">
      <h3>${escapeHtml(status.prompt)}</h3>
      <div class="answers">
        <button data-action="answer-yes"${disabled}>Yes</button>
        ${previewHint(state.previews.yes)}
        <button data-action="answer-no"${disabled}>No</button>
        ${previewHint(state.previews.no)}
      </div>
      <button data-action="undo"${undoDisabled}>Undo</button>
    </div>
    ${renderBreadcrumb(state)}
  `;
}

export function renderAnswer(value: unknown): string {
  return escapeHtml(answerWord(value));
}
