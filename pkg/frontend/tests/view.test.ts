import { describe, expect, it } from 'vitest';

import type { InstanceSnapshot, ScopeView } from '../src/types.js';
import { buildScreen, findControl, initialViewState, ViewState } from '../src/view.js';

// Snapshots below mirror the gateway's JSON for the six-activity starter
// model (existence(1, A), precedence(C, E)) and the sub-process model.

function starterRoot(): ScopeView {
  return {
    id: 'root',
    model: 'Main',
    status: 'running',
    completions: [],
    running: [],
    activities: [
      { name: 'A', complex: false, enabled: true },
      { name: 'B', complex: false, enabled: true },
      { name: 'C', complex: false, enabled: true },
      { name: 'D', complex: false, enabled: true },
      { name: 'E', complex: false, enabled: false },
      { name: 'F', complex: false, enabled: true },
    ],
    enabled: ['A', 'B', 'C', 'D', 'F'],
    may_terminate: false,
    termination_blockers: ['existence(1, A)'],
    constraints: [
      {
        text: 'existence(1, A)',
        template: 'existence',
        operands: ['A'],
        cardinality: 1,
        status: 'pending',
        blocking: [],
      },
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

function snapshot(root: ScopeView, terminated = false): InstanceSnapshot {
  return { id: 'i1', model: 'Main', terminated, root, events: [] };
}

function stateWith(patch: Partial<ViewState>): ViewState {
  return { ...initialViewState, ...patch };
}

describe('screen building', () => {
  it('greys a blocked activity and quotes its blocker', () => {
    const screen = buildScreen(stateWith({ snapshot: snapshot(starterRoot()) }));
    const e = findControl(screen, 'E')!;
    expect(e.enabled).toBe(false);
    expect(e.tooltip).toContain('precedence(C, E)');
    for (const label of ['A', 'B', 'C', 'D', 'F']) {
      expect(findControl(screen, label)!.enabled).toBe(true);
    }
  });

  it('greys terminate and quotes the pending constraint', () => {
    const screen = buildScreen(stateWith({ snapshot: snapshot(starterRoot()) }));
    expect(screen.terminate.enabled).toBe(false);
    expect(screen.terminate.tooltip).toContain('existence(1, A)');
  });

  it('shows constraint badges with their status', () => {
    const screen = buildScreen(stateWith({ snapshot: snapshot(starterRoot()) }));
    expect(screen.root!.badges).toEqual([
      { text: 'existence(1, A)', status: 'pending', blocking: [] },
      { text: 'precedence(C, E)', status: 'accepting', blocking: ['E'] },
    ]);
  });

  it('disables everything while a command is in flight', () => {
    const screen = buildScreen(
      stateWith({ snapshot: snapshot(starterRoot()), inFlight: true }),
    );
    expect(screen.busy).toBe(true);
    for (const control of screen.root!.controls) {
      expect(control.enabled).toBe(false);
    }
    expect(screen.terminate.enabled).toBe(false);
  });

  it('never leaves stale interactivity behind a network banner', () => {
    const screen = buildScreen(
      stateWith({ snapshot: snapshot(starterRoot()), banner: 'gateway unreachable: boom' }),
    );
    expect(screen.banner).toContain('boom');
    expect(screen.root!.controls.every((c) => !c.enabled)).toBe(true);
    expect(screen.terminate.enabled).toBe(false);
  });

  it('renders a rejection verbatim including blockers', () => {
    const screen = buildScreen(
      stateWith({
        snapshot: snapshot(starterRoot()),
        rejection: {
          error: "starting 'E' would permanently violate local constraints",
          kind: 'disabled',
          blockers: ['precedence(C, E)'],
        },
      }),
    );
    expect(screen.rejection).toBe(
      "starting 'E' would permanently violate local constraints [precedence(C, E)]",
    );
  });

  it('shows the session-lost dialog state', () => {
    const screen = buildScreen(stateWith({ sessionLost: true }));
    expect(screen.sessionLost).toBe(true);
  });

  it('disables all controls on a terminated instance', () => {
    const screen = buildScreen(stateWith({ snapshot: snapshot(starterRoot(), true) }));
    expect(screen.terminated).toBe(true);
    expect(screen.root!.controls.every((c) => !c.enabled)).toBe(true);
    expect(screen.terminate.enabled).toBe(false);
    expect(screen.terminate.tooltip).toContain('already terminated');
  });
});

describe('nested sub-process panels', () => {
  function nestedRoot(): ScopeView {
    return {
      id: 'root',
      model: 'Main',
      status: 'running',
      completions: [],
      running: [{ id: 'a1', activity: 'B', complex: true }],
      activities: [
        { name: 'A', complex: false, enabled: true },
        { name: 'B', complex: true, enabled: false },
      ],
      enabled: ['A'],
      may_terminate: false,
      termination_blockers: [],
      constraints: [],
      children: {
        B: {
          id: 's1',
          model: 'Sub',
          status: 'running',
          completions: [],
          running: [],
          activities: [
            { name: 'C', complex: false, enabled: true },
            { name: 'D', complex: false, enabled: false },
          ],
          enabled: ['C'],
          may_terminate: true,
          termination_blockers: [],
          constraints: [
            {
              text: 'precedence(C, D)',
              template: 'precedence',
              operands: ['C', 'D'],
              cardinality: null,
              status: 'accepting',
              blocking: ['D'],
            },
          ],
          children: {},
          finished_children: [],
        },
      },
      finished_children: [],
    };
  }

  it('renders the running sub-process as a nested panel', () => {
    const screen = buildScreen(stateWith({ snapshot: snapshot(nestedRoot()) }));
    expect(screen.root!.children).toHaveLength(1);
    const sub = screen.root!.children[0];
    expect(sub.scopeId).toBe('s1');
    const c = sub.controls.find((x) => x.label === 'C')!;
    const d = sub.controls.find((x) => x.label === 'D')!;
    expect(c.enabled).toBe(true);
    expect(d.enabled).toBe(false);
    expect(d.tooltip).toContain('precedence(C, D)');
  });

  it('a running complex activity cannot be started again', () => {
    const screen = buildScreen(stateWith({ snapshot: snapshot(nestedRoot()) }));
    const start = findControl(screen, 'start B')!;
    expect(start.enabled).toBe(false);
    expect(start.tooltip).toContain('already running');
  });

  it('complete is offered for the running instance and honors readiness', () => {
    const ready = buildScreen(stateWith({ snapshot: snapshot(nestedRoot()) }));
    expect(findControl(ready, 'complete B')!.enabled).toBe(true);

    const blockedRoot = nestedRoot();
    blockedRoot.children.B.may_terminate = false;
    blockedRoot.children.B.termination_blockers = ['exactly(1, A)'];
    const blocked = buildScreen(stateWith({ snapshot: snapshot(blockedRoot) }));
    const complete = findControl(blocked, 'complete B')!;
    expect(complete.enabled).toBe(false);
    expect(complete.tooltip).toContain('exactly(1, A)');
  });
});
