import type { Command, InstanceSnapshot, Rejection } from './types.js';

export class GatewayRejection extends Error {
  constructor(public rejection: Rejection) {
    super(rejection.error);
  }
}

export class SessionLost extends Error {}

async function parseBody(resp: Response): Promise<any> {
  try {
    return await resp.json();
  } catch {
    return { error: `unexpected response ${resp.status}` };
  }
}

/** Thin typed client over the gateway's JSON routes. */
export class GatewayClient {
  constructor(private base: string, private fetchImpl: typeof fetch = fetch) {}

  private async request(method: string, path: string, body?: unknown): Promise<any> {
    const resp = await this.fetchImpl(`${this.base}${path}`, {
      method,
      headers: body !== undefined ? { 'Content-Type': 'application/json' } : undefined,
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    if (resp.status === 404) {
      throw new SessionLost((await parseBody(resp)).error ?? 'gone');
    }
    if (resp.status === 409) {
      throw new GatewayRejection((await parseBody(resp)) as Rejection);
    }
    if (!resp.ok) {
      throw new Error((await parseBody(resp)).error ?? `HTTP ${resp.status}`);
    }
    return parseBody(resp);
  }

  listModels(): Promise<string[]> {
    return this.request('GET', '/models').then((b) => b.models as string[]);
  }

  uploadModel(text: string): Promise<string> {
    return this.request('POST', '/models', { text }).then((b) => b.model as string);
  }

  createInstance(model: string): Promise<InstanceSnapshot> {
    return this.request('POST', '/instances', { model });
  }

  getInstance(id: string): Promise<InstanceSnapshot> {
    return this.request('GET', `/instances/${encodeURIComponent(id)}`);
  }

  async sendCommand(id: string, command: Command): Promise<InstanceSnapshot> {
    const path =
      command.kind === 'terminate'
        ? `/instances/${encodeURIComponent(id)}/terminate`
        : `/instances/${encodeURIComponent(id)}/commands`;
    const body = await this.request('POST', path, command.kind === 'terminate' ? {} : command);
    return body.state as InstanceSnapshot;
  }
}
