import { describe, expect, it } from 'vitest';

import { ApiError, Client } from '../src/api';

function recordingClient(status = 200, payload: unknown = { ok: true }) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const client = new Client('http://svc.test', async (url, init) => {
    calls.push({ url, init });
    return new Response(JSON.stringify(payload), { status });
  });
  return { client, calls };
}

describe('api client', () => {
  it('encodes each endpoint with the right method, path and body', async () => {
    const { client, calls } = recordingClient();
    await client.tree();
    await client.check();
    await client.evaluate({ natural_person: false });
    await client.createSession();
    await client.createSession([{ predicate: 'p', value: true, reply: 'yes' }]);
    await client.getSession('s1');
    await client.answer('s1', 3, 'no');
    await client.undo('s1', 4);
    await client.whatIf('s1', 'yes');

    const seen = calls.map((c) => [c.init?.method, c.url.replace('http://svc.test', ''),
                                   c.init?.body ? JSON.parse(String(c.init.body)) : null]);
    expect(seen).toEqual([
      ['GET', '/api/tree', null],
      ['POST', '/api/check', {}],
      ['POST', '/api/eval', { facts: { natural_person: false } }],
      ['POST', '/api/session', {}],
      ['POST', '/api/session',
       { replay: [{ predicate: 'p', value: true, reply: 'yes' }] }],
      ['GET', '/api/session/s1', null],
      ['POST', '/api/session/s1/answer', { version: 3, reply: 'no' }],
      ['POST', '/api/session/s1/undo', { version: 4 }],
      ['POST', '/api/session/s1/what_if', { reply: 'yes' }],
    ]);
  });

  it('turns error envelopes into typed ApiErrors', async () => {
    const { client } = recordingClient(409, {
      error_code: 'VersionConflict',
      message: 'expected version 2, got 1',
    });
    const err = await client.answer('s1', 1, 'yes').catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.code).toBe('VersionConflict');
    expect(err.isVersionConflict).toBe(true);
  });

  it('maps transport failures to a network error', async () => {
    const client = new Client('http://svc.test', async () => {
      throw new TypeError('fetch failed');
    });
    const err = await client.tree().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(0);
    expect(err.code).toBe('Network');
  });

  it('copes with non-JSON error bodies', async () => {
    const client = new Client('http://svc.test', async () =>
      new Response('<html>gateway error</html>', { status: 502 }));
    const err = await client.tree().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe('HttpError');
    expect(err.status).toBe(502);
  });
});
