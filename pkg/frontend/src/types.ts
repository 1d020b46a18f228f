// Wire types mirrored from the gateway's JSON payloads. The explorer never
// computes enablement itself; every flag here is server-authoritative.

export type ConstraintStatus = 'accepting' | 'pending' | 'violated';

export interface ConstraintView {
  text: string;
  template: string;
  operands: string[];
  cardinality: number | null;
  status: ConstraintStatus;
  /** labels whose completion the gateway would refuse right now */
  blocking: string[];
}

export interface ActivityView {
  name: string;
  complex: boolean;
  enabled: boolean;
}

export interface RunningView {
  id: string;
  activity: string;
  complex: boolean;
}

export interface ScopeView {
  id: string;
  model: string;
  status: 'running' | 'completed';
  completions: string[];
  running: RunningView[];
  activities: ActivityView[];
  enabled: string[];
  may_terminate: boolean;
  termination_blockers: string[];
  constraints: ConstraintView[];
  children: Record<string, ScopeView>;
  finished_children: ScopeView[];
}

export interface EventView {
  seq: number;
  kind: 'started' | 'completed' | 'terminated';
  scope: string;
  activity: string | null;
  activity_instance: string | null;
}

export interface InstanceSnapshot {
  id: string;
  model: string;
  terminated: boolean;
  root: ScopeView;
  events: EventView[];
}

export type CommandKind = 'start' | 'complete' | 'execute' | 'terminate';

export interface Command {
  kind: CommandKind;
  activity?: string;
  activity_instance?: string;
  scope?: string;
}

export interface Rejection {
  error: string;
  kind: string;
  blockers: string[];
}
