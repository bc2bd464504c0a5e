// Consultation state machine. One active session per tab; the replay list
// is persisted to tab storage so a refresh (or server-side eviction) can
// rebuild the session. State never advances optimistically: every change is
// applied only after the server acknowledged it, and a version conflict
// refreshes from the server and surfaces a retry message instead of
// guessing.

import { ApiError, Client } from './api';
import type { Answer, PreviewDto, ReplayStep, SessionStatusDto } from './types';

export interface Breadcrumb extends ReplayStep {
  prompt: string;
}

export interface WizardState {
  phase: 'loading' | 'ready' | 'error';
  sessionId: string | null;
  version: number;
  status: SessionStatusDto | null;
  breadcrumb: Breadcrumb[];
  previews: { yes: PreviewDto | null; no: PreviewDto | null };
  error: string | null;
  busy: boolean;
}

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

const STORAGE_KEY = 'lextree.consultation';

type Listener = (state: WizardState) => void;

export class ConsultationStore {
  private state: WizardState = {
    phase: 'loading',
    sessionId: null,
    version: 0,
    status: null,
    breadcrumb: [],
    previews: { yes: null, no: null },
    error: null,
    busy: false,
  };
  private listeners: Listener[] = [];

  constructor(
    private readonly client: Client,
    private readonly storage: StorageLike,
  ) {}

  snapshot(): WizardState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private set(partial: Partial<WizardState>): void {
    this.state = { ...this.state, ...partial };
    for (const listener of this.listeners) listener(this.state);
  }

  private persist(): void {
    const replay: Breadcrumb[] = this.state.breadcrumb;
    this.storage.setItem(STORAGE_KEY, JSON.stringify(replay));
  }

  private storedReplay(): Breadcrumb[] {
    const raw = this.storage.getItem(STORAGE_KEY);
    if (!raw) return [];
    try {
      const parsed = JSON.parse(raw) as Breadcrumb[];
      return Array.isArray(parsed) ? parsed : [];
    } catch {
      return [];
    }
  }

  /** Open a session, replaying any stored breadcrumb from a previous visit. */
  async init(): Promise<void> {
    this.set({ phase: 'loading', error: null });
    const replay = this.storedReplay();
    try {
      let created;
      try {
        created = await this.client.createSession(
          replay.map(({ predicate, value, reply }) => ({ predicate, value, reply })),
        );
      } catch (err) {
        if (err instanceof ApiError && err.code === 'ReplayMismatch') {
          // The stored walk no longer matches the served tree; start over.
          this.storage.removeItem(STORAGE_KEY);
          created = await this.client.createSession();
          replay.length = 0;
        } else {
          throw err;
        }
      }
      this.set({
        phase: 'ready',
        sessionId: created.session_id,
        version: created.version,
        status: created.status,
        breadcrumb: replay,
        error: null,
      });
      this.persist();
      await this.refreshPreviews();
    } catch (err) {
      this.set({ phase: 'error', error: describe(err) });
    }
  }

  /** Restart from the first question, discarding the stored breadcrumb. */
  async restart(): Promise<void> {
    this.storage.removeItem(STORAGE_KEY);
    this.set({ breadcrumb: [] });
    await this.init();
  }

  async answer(reply: 'yes' | 'no'): Promise<void> {
    const { sessionId, status, version, busy } = this.state;
    if (busy || !sessionId || status?.state !== 'awaiting_answer') return;
    this.set({ busy: true, error: null });
    try {
      const advanced = await this.client.answer(sessionId, version, reply);
      const step: Breadcrumb = {
        predicate: status.predicate,
        value: status.value,
        reply,
        prompt: status.prompt,
      };
      this.set({
        version: advanced.version,
        status: advanced.status,
        breadcrumb: [...this.state.breadcrumb, step],
        busy: false,
      });
      this.persist();
      await this.refreshPreviews();
    } catch (err) {
      await this.recover(err);
    }
  }

  async undo(): Promise<void> {
    const { sessionId, version, busy, breadcrumb } = this.state;
    if (busy || !sessionId || breadcrumb.length === 0) return;
    this.set({ busy: true, error: null });
    try {
      const advanced = await this.client.undo(sessionId, version);
      this.set({
        version: advanced.version,
        status: advanced.status,
        breadcrumb: breadcrumb.slice(0, -1),
        busy: false,
      });
      this.persist();
      await this.refreshPreviews();
    } catch (err) {
      await this.recover(err);
    }
  }

  private async refreshPreviews(): Promise<void> {
    const { sessionId, status } = this.state;
    if (!sessionId || status?.state !== 'awaiting_answer') {
      this.set({ previews: { yes: null, no: null } });
      return;
    }
    try {
      const [yes, no] = await Promise.all([
        this.client.whatIf(sessionId, 'yes'),
        this.client.whatIf(sessionId, 'no'),
      ]);
      this.set({ previews: { yes: yes.preview, no: no.preview } });
    } catch {
      // Previews are a nicety; the wizard stays usable without them.
      this.set({ previews: { yes: null, no: null } });
    }
  }

  /** On conflict or connectivity failure: resync with the server, keep the
   * user's view truthful, and ask them to retry. */
  private async recover(err: unknown): Promise<void> {
    const { sessionId } = this.state;
    if (err instanceof ApiError && err.isVersionConflict && sessionId) {
      try {
        const snapshot = await this.client.getSession(sessionId);
        this.set({
          version: snapshot.version,
          status: snapshot.status,
          breadcrumb: toBreadcrumb(snapshot.answered, this.state.breadcrumb),
          busy: false,
          error: 'The session changed elsewhere; state was refreshed. Try again.',
        });
        this.persist();
        await this.refreshPreviews();
        return;
      } catch {
        // fall through to the generic handler
      }
    }
    this.set({ busy: false, error: describe(err) });
  }
}

function toBreadcrumb(
  answered: { predicate: string; value: Answer; reply: 'yes' | 'no' }[],
  previous: Breadcrumb[],
): Breadcrumb[] {
  return answered.map((step, i) => ({
    predicate: step.predicate,
    value: step.value,
    reply: step.reply,
    prompt:
      previous[i] && previous[i]!.predicate === step.predicate
        ? previous[i]!.prompt
        : `${step.predicate} = ${String(step.value)}`,
  }));
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return err.status === 0
      ? `Cannot reach the service: ${err.message}. Retry when it is back.`
      : `${err.code}: ${err.message}`;
  }
  return err instanceof Error ? err.message : String(err);
}
