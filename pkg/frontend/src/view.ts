import type {
  Command,
  ConstraintView,
  EventView,
  InstanceSnapshot,
  Rejection,
  ScopeView,
} from './types.js';

// The screen is a pure projection of (last server snapshot, in-flight flag,
// last error). No enablement is ever computed client-side: buttons are
// enabled exactly where the snapshot says the gateway would accept the
// command, and tooltips quote the snapshot's blocker lists verbatim.

export interface ViewState {
  snapshot: InstanceSnapshot | null;
  inFlight: boolean;
  banner: string | null; // network trouble; view stays visible but inert
  rejection: Rejection | null; // last structured 409, shown inline
  sessionLost: boolean;
}

export const initialViewState: ViewState = {
  snapshot: null,
  inFlight: false,
  banner: null,
  rejection: null,
  sessionLost: false,
};

export interface ControlView {
  label: string;
  command: Command | null; // null = purely informational chip
  enabled: boolean;
  tooltip: string;
  role: 'run' | 'start' | 'complete' | 'terminate';
}

export interface BadgeView {
  text: string;
  status: ConstraintView['status'];
  blocking: string[];
}

export interface PanelView {
  scopeId: string;
  title: string;
  completed: boolean;
  controls: ControlView[];
  badges: BadgeView[];
  completions: string[];
  children: PanelView[];
}

export interface Screen {
  title: string;
  busy: boolean;
  banner: string | null;
  rejection: string | null;
  sessionLost: boolean;
  terminated: boolean;
  root: PanelView | null;
  terminate: ControlView;
  history: string[];
}

function blockersFor(scope: ScopeView, label: string): string[] {
  return scope.constraints.filter((c) => c.blocking.includes(label)).map((c) => c.text);
}

function startTooltip(scope: ScopeView, name: string, running: boolean): string {
  if (running) {
    return 'already running: one instance at a time in this scope';
  }
  const blockers = blockersFor(scope, name);
  return blockers.length ? `blocked by ${blockers.join('; ')}` : '';
}

function completeTooltip(scope: ScopeView, label: string, child: ScopeView | undefined): string {
  const parts: string[] = [];
  if (child && !child.may_terminate) {
    const inner = child.termination_blockers.length
      ? child.termination_blockers.join('; ')
      : 'activities still running inside';
    parts.push(`sub-process not ready: ${inner}`);
  }
  const blockers = blockersFor(scope, label);
  if (blockers.length) {
    parts.push(`blocked by ${blockers.join('; ')}`);
  }
  return parts.join(' | ');
}

function scopePanel(scope: ScopeView, interactive: boolean): PanelView {
  const controls: ControlView[] = [];
  const runningLabels = new Set(scope.running.map((r) => r.activity));
  for (const activity of scope.activities) {
    if (activity.complex) {
      const running = runningLabels.has(activity.name);
      controls.push({
        label: `start ${activity.name}`,
        command: { kind: 'start', activity: activity.name, scope: scope.id },
        enabled: interactive && activity.enabled && !running,
        tooltip: startTooltip(scope, activity.name, running),
        role: 'start',
      });
    } else {
      controls.push({
        label: activity.name,
        command: { kind: 'execute', activity: activity.name, scope: scope.id },
        enabled: interactive && activity.enabled,
        tooltip: activity.enabled ? '' : startTooltip(scope, activity.name, false),
        role: 'run',
      });
    }
  }
  for (const run of scope.running) {
    const child = run.complex ? scope.children[run.activity] : undefined;
    const ready = !run.complex || (child !== undefined && child.may_terminate);
    const blockedNow = blockersFor(scope, run.activity).length > 0;
    controls.push({
      label: `complete ${run.activity}`,
      command: { kind: 'complete', activity_instance: run.id },
      enabled: interactive && ready && !blockedNow,
      tooltip: completeTooltip(scope, run.activity, child),
      role: 'complete',
    });
  }
  const children = Object.keys(scope.children)
    .sort()
    .map((label) => scopePanel(scope.children[label], interactive));
  return {
    scopeId: scope.id,
    title: `${scope.model} [${scope.id}]`,
    completed: scope.status === 'completed',
    controls,
    badges: scope.constraints.map((c) => ({ text: c.text, status: c.status, blocking: c.blocking })),
    completions: scope.completions,
    children,
  };
}

function eventLine(ev: EventView): string {
  if (ev.kind === 'terminated') {
    return `e${ev.seq}: terminated`;
  }
  return `e${ev.seq}: ${ev.activity} ${ev.kind} [${ev.scope}]`;
}

export function buildScreen(state: ViewState): Screen {
  const snap = state.snapshot;
  const interactive =
    snap !== null && !snap.terminated && !state.inFlight && state.banner === null && !state.sessionLost;
  let terminate: ControlView = {
    label: 'Terminate instance',
    command: { kind: 'terminate' },
    enabled: false,
    tooltip: '',
    role: 'terminate',
  };
  let root: PanelView | null = null;
  if (snap) {
    root = scopePanel(snap.root, interactive);
    const blockers = snap.root.termination_blockers;
    const runningCount = snap.root.running.length;
    let tooltip = '';
    if (snap.terminated) {
      tooltip = 'instance already terminated';
    } else if (!snap.root.may_terminate) {
      const parts = [...blockers];
      if (runningCount > 0) {
        parts.push(`${runningCount} running activit${runningCount === 1 ? 'y' : 'ies'}`);
      }
      tooltip = `blocked by ${parts.join('; ')}`;
    }
    terminate = {
      ...terminate,
      enabled: interactive && snap.root.may_terminate,
      tooltip,
    };
  }
  return {
    title: snap ? `${snap.model} — instance ${snap.id}` : 'no instance loaded',
    busy: state.inFlight,
    banner: state.banner,
    rejection: state.rejection
      ? state.rejection.blockers.length
        ? `${state.rejection.error} [${state.rejection.blockers.join('; ')}]`
        : state.rejection.error
      : null,
    sessionLost: state.sessionLost,
    terminated: snap?.terminated ?? false,
    root,
    terminate,
    history: snap ? snap.events.map(eventLine) : [],
  };
}

/** Find one control in a built screen; test and DOM layers share this. */
export function findControl(screen: Screen, label: string): ControlView | undefined {
  const stack: PanelView[] = screen.root ? [screen.root] : [];
  while (stack.length) {
    const panel = stack.pop()!;
    const hit = panel.controls.find((c) => c.label === label);
    if (hit) {
      return hit;
    }
    stack.push(...panel.children);
  }
  if (screen.terminate.label === label) {
    return screen.terminate;
  }
  return undefined;
}
