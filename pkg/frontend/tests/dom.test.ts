// @vitest-environment happy-dom
import { describe, expect, it, vi } from 'vitest';

import { renderScreen } from '../src/dom.js';
import type { InstanceSnapshot, ScopeView } from '../src/types.js';
import { buildScreen, initialViewState } from '../src/view.js';

function root(): ScopeView {
  return {
    id: 'root',
    model: 'Main',
    status: 'running',
    completions: ['B'],
    running: [],
    activities: [
      { name: 'A', complex: false, enabled: true },
      { name: 'E', complex: false, enabled: false },
    ],
    enabled: ['A'],
    may_terminate: false,
    termination_blockers: ['existence(1, A)'],
    constraints: [
      {
        text: 'precedence(C, E)',
        template: 'precedence',
        operands: ['C', 'E'],
        cardinality: null,
        status: 'accepting',
        blocking: ['E'],
      },
    ],
    children: {},
    finished_children: [],
  };
}

function snapshot(): InstanceSnapshot {
  return {
    id: 'i1',
    model: 'Main',
    terminated: false,
    root: root(),
    events: [
      { seq: 1, kind: 'started', scope: 'root', activity: 'B', activity_instance: 'a1' },
      { seq: 2, kind: 'completed', scope: 'root', activity: 'B', activity_instance: 'a1' },
    ],
  };
}

describe('DOM painting', () => {
  it('paints buttons with disabled state, tooltips, and history', () => {
    const screen = buildScreen({ ...initialViewState, snapshot: snapshot() });
    const container = document.createElement('div');
    const send = vi.fn();
    renderScreen(screen, container, send, () => {});

    const buttons = Array.from(container.querySelectorAll('button')) as HTMLButtonElement[];
    const byLabel = new Map(buttons.map((b) => [b.textContent, b]));
    expect(byLabel.get('A')!.disabled).toBe(false);
    expect(byLabel.get('E')!.disabled).toBe(true);
    expect(byLabel.get('E')!.title).toContain('precedence(C, E)');
    const terminate = byLabel.get('Terminate instance')!;
    expect(terminate.disabled).toBe(true);
    expect(terminate.title).toContain('existence(1, A)');

    byLabel.get('A')!.click();
    expect(send).toHaveBeenCalledWith({ kind: 'execute', activity: 'A', scope: 'root' });
    byLabel.get('E')!.click();
    expect(send).toHaveBeenCalledTimes(1); // disabled controls never fire

    expect(container.querySelector('.hd-history')!.textContent).toContain('e2: B completed');
  });

  it('paints the retry banner and wires the retry action', () => {
    const screen = buildScreen({
      ...initialViewState,
      snapshot: snapshot(),
      banner: 'gateway unreachable: refused',
    });
    const container = document.createElement('div');
    const retry = vi.fn();
    renderScreen(screen, container, vi.fn(), retry);
    const banner = container.querySelector('.hd-banner')!;
    expect(banner.textContent).toContain('gateway unreachable');
    (banner.querySelector('button') as HTMLButtonElement).click();
    expect(retry).toHaveBeenCalledOnce();
  });

  it('replaces everything with the session-lost dialog', () => {
    const screen = buildScreen({ ...initialViewState, sessionLost: true });
    const container = document.createElement('div');
    renderScreen(screen, container, vi.fn(), vi.fn());
    expect(container.querySelector('.hd-dialog')!.textContent).toContain('Session lost');
    expect(container.querySelectorAll('button')).toHaveLength(0);
  });
});
