// End-to-end flow against a live lextree server. Start one with
//   lextree serve --tree src/lextree/fixtures/vietnam.lex --port 8713
// and run LEXTREE_SERVER=http://127.0.0.1:8713 npm test
// (skipped when the variable is unset, e.g. in plain unit runs).

import { describe, expect, it } from 'vitest';

import { Client } from '../src/api';
import { edgeCount, nodeCount, pathIndexes, renderTree } from '../src/inspector';
import { ConsultationStore } from '../src/store';
import { MemoryStorage } from './fakeBackend';

const base = process.env.LEXTREE_SERVER;

describe.skipIf(!base)('live server end-to-end', () => {
  const client = () => new Client(base!);

  it('one No click shows the refusal outcome, undo restores, refresh replays', async () => {
    const storage = new MemoryStorage();
    const store = new ConsultationStore(client(), storage);
    await store.init();
    expect(store.snapshot().status).toMatchObject({
      state: 'awaiting_answer',
      prompt: 'Is the testator a natural person?',
    });

    await store.answer('no');
    const done = store.snapshot();
    expect(done.status?.state).toBe('done');
    if (done.status?.state === 'done') {
      expect(done.status.outcome.text).toBe('No right to make a will');
    }

    await store.undo();
    const undone = store.snapshot();
    expect(undone.status?.state).toBe('awaiting_answer');
    expect(undone.breadcrumb).toHaveLength(0);

    await store.answer('yes');
    const reloaded = new ConsultationStore(client(), storage);
    await reloaded.init();
    expect(reloaded.snapshot().breadcrumb).toEqual(store.snapshot().breadcrumb);
    const server = await client().getSession(reloaded.snapshot().sessionId!);
    expect(server.answered.map(({ predicate, value, reply }) =>
      ({ predicate, value, reply }))).toEqual(
      reloaded.snapshot().breadcrumb.map(({ predicate, value, reply }) =>
        ({ predicate, value, reply })));
  });

  it('inspector counts equal the stats from /api/tree', async () => {
    const response = await client().tree();
    expect(nodeCount(response.tree)).toBe(response.stats.internal + response.stats.leaves);
    expect(edgeCount(response.tree)).toBe(nodeCount(response.tree) - 1);
    const html = renderTree(response.tree, pathIndexes(response.tree, []));
    expect(html.match(/data-node="/g)).toHaveLength(nodeCount(response.tree));
  });

  it('the audit endpoint reports a clean fixture', async () => {
    const report = await client().check();
    expect(report.conflicts).toEqual([]);
  });
});
