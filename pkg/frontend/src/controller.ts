import { GatewayClient, GatewayRejection, SessionLost } from './api.js';
import type { Command, InstanceSnapshot } from './types.js';
import { buildScreen, initialViewState, Screen, ViewState } from './view.js';

export type Listener = (screen: Screen, state: ViewState) => void;

/**
 * One live instance session. All mutations flow through the gateway; the
 * session only ever holds the last authoritative snapshot plus transient
 * error state, and pushes freshly built screens to its listeners.
 */
export class ExplorerSession {
  private state: ViewState = { ...initialViewState };
  private listeners: Listener[] = [];

  constructor(private client: GatewayClient, private instanceId: string) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
    listener(this.screen(), this.state);
  }

  screen(): Screen {
    return buildScreen(this.state);
  }

  current(): ViewState {
    return this.state;
  }

  private push(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    const screen = this.screen();
    for (const listener of this.listeners) {
      listener(screen, this.state);
    }
  }

  private adopt(snapshot: InstanceSnapshot): void {
    this.push({ snapshot, banner: null, sessionLost: false });
  }

  /** Fetch the authoritative state; also the retry action for the banner. */
  async refresh(): Promise<void> {
    try {
      const snapshot = await this.client.getInstance(this.instanceId);
      this.adopt(snapshot);
    } catch (err) {
      this.fail(err);
    }
  }

  /**
   * Send one command. A second call while one is pending is dropped (the
   * controls are disabled anyway, so this only guards double events).
   */
  async send(command: Command): Promise<void> {
    if (this.state.inFlight || this.state.sessionLost) {
      return;
    }
    this.push({ inFlight: true, rejection: null });
    try {
      const snapshot = await this.client.sendCommand(this.instanceId, command);
      this.push({ inFlight: false });
      this.adopt(snapshot);
    } catch (err) {
      if (err instanceof GatewayRejection) {
        this.push({ inFlight: false, rejection: err.rejection });
        await this.refresh(); // re-sync: a rejection explains, never stales
        return;
      }
      this.push({ inFlight: false });
      this.fail(err);
    }
  }

  private fail(err: unknown): void {
    if (err instanceof SessionLost) {
      this.push({ sessionLost: true });
      return;
    }
    const message = err instanceof Error ? err.message : String(err);
    this.push({ banner: `gateway unreachable: ${message}` });
  }
}
