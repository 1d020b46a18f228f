import type { Command } from './types.js';
import type { ControlView, PanelView, Screen } from './view.js';

export const CSS = `
.hd-root { font: 14px/1.45 system-ui, sans-serif; color: #1c2330; max-width: 980px; margin: 0 auto; padding: 16px; }
.hd-title { font-size: 18px; font-weight: 600; margin: 0 0 10px; }
.hd-banner { background: #8f1f1f; color: #fff; padding: 8px 12px; border-radius: 6px; margin-bottom: 10px; display: flex; justify-content: space-between; gap: 12px; }
.hd-banner button { background: #fff; border: 0; border-radius: 4px; padding: 4px 10px; cursor: pointer; }
.hd-rejection { background: #fff4e0; border: 1px solid #e3b04b; color: #6b4a00; padding: 8px 12px; border-radius: 6px; margin-bottom: 10px; }
.hd-dialog { background: #fff; border: 2px solid #8f1f1f; border-radius: 8px; padding: 18px; text-align: center; }
.hd-panel { border: 1px solid #cfd6e4; border-radius: 8px; padding: 12px; margin: 10px 0; background: #fff; }
.hd-panel.completed { opacity: 0.6; background: #f3f5f9; }
.hd-panel h3 { margin: 0 0 8px; font-size: 14px; }
.hd-children { margin-left: 22px; border-left: 3px solid #cfd6e4; padding-left: 10px; }
.hd-controls { display: flex; flex-wrap: wrap; gap: 6px; margin-bottom: 8px; }
.hd-controls button { padding: 6px 12px; border-radius: 6px; border: 1px solid #9aa7be; background: #eef2f9; cursor: pointer; }
.hd-controls button:disabled { opacity: 0.45; cursor: not-allowed; }
.hd-badges { display: flex; flex-wrap: wrap; gap: 6px; margin-bottom: 6px; }
.hd-badge { font-size: 12px; padding: 2px 8px; border-radius: 10px; border: 1px solid transparent; }
.hd-badge.accepting { background: #e2f5e6; border-color: #53a05f; color: #1e5227; }
.hd-badge.pending { background: #f4f0da; border-color: #b8a13c; color: #5d4f0e; }
.hd-badge.violated { background: #fbe3e3; border-color: #c35050; color: #6e1414; }
.hd-completions { font-size: 12px; color: #5a6678; }
.hd-terminate { margin: 14px 0; }
.hd-terminate button { padding: 8px 16px; border-radius: 6px; border: 1px solid #8f1f1f; background: #fbe9e9; cursor: pointer; font-weight: 600; }
.hd-terminate button:disabled { opacity: 0.45; cursor: not-allowed; }
.hd-done { background: #e2f5e6; border: 1px solid #53a05f; padding: 8px 12px; border-radius: 6px; margin: 10px 0; }
.hd-history { font: 12px/1.6 ui-monospace, monospace; background: #10151f; color: #cfe3cf; border-radius: 8px; padding: 10px 14px; max-height: 220px; overflow: auto; }
`;

export type CommandSink = (command: Command) => void;

function button(control: ControlView, send: CommandSink, doc: Document): HTMLButtonElement {
  const el = doc.createElement('button');
  el.textContent = control.label;
  el.disabled = !control.enabled;
  if (control.tooltip) {
    el.title = control.tooltip;
  }
  el.dataset.role = control.role;
  if (control.command) {
    const command = control.command;
    el.addEventListener('click', () => send(command));
  }
  return el;
}

function panel(view: PanelView, send: CommandSink, doc: Document): HTMLElement {
  const section = doc.createElement('section');
  section.className = 'hd-panel' + (view.completed ? ' completed' : '');
  section.dataset.scope = view.scopeId;

  const head = doc.createElement('h3');
  head.textContent = view.title + (view.completed ? ' (completed)' : '');
  section.appendChild(head);

  const controls = doc.createElement('div');
  controls.className = 'hd-controls';
  for (const control of view.controls) {
    controls.appendChild(button(control, send, doc));
  }
  section.appendChild(controls);

  if (view.badges.length) {
    const badges = doc.createElement('div');
    badges.className = 'hd-badges';
    for (const badge of view.badges) {
      const chip = doc.createElement('span');
      chip.className = `hd-badge ${badge.status}`;
      chip.textContent = `${badge.text}: ${badge.status}`;
      if (badge.blocking.length) {
        chip.title = `currently blocks: ${badge.blocking.join(', ')}`;
      }
      badges.appendChild(chip);
    }
    section.appendChild(badges);
  }

  const completions = doc.createElement('div');
  completions.className = 'hd-completions';
  completions.textContent = view.completions.length
    ? `completed here: ${view.completions.join(', ')}`
    : 'nothing completed in this scope yet';
  section.appendChild(completions);

  if (view.children.length) {
    const nest = doc.createElement('div');
    nest.className = 'hd-children';
    for (const child of view.children) {
      nest.appendChild(panel(child, send, doc));
    }
    section.appendChild(nest);
  }
  return section;
}

/** Paint a screen into the container; the whole subtree is replaced. */
export function renderScreen(
  screen: Screen,
  container: HTMLElement,
  send: CommandSink,
  retry: () => void,
): void {
  const doc = container.ownerDocument;
  container.textContent = '';
  const rootDiv = doc.createElement('div');
  rootDiv.className = 'hd-root';

  const title = doc.createElement('h2');
  title.className = 'hd-title';
  title.textContent = screen.title + (screen.busy ? ' …' : '');
  rootDiv.appendChild(title);

  if (screen.sessionLost) {
    const dialog = doc.createElement('div');
    dialog.className = 'hd-dialog';
    dialog.textContent = 'Session lost: the instance no longer exists on the gateway.';
    rootDiv.appendChild(dialog);
    container.appendChild(rootDiv);
    return;
  }

  if (screen.banner) {
    const banner = doc.createElement('div');
    banner.className = 'hd-banner';
    const label = doc.createElement('span');
    label.textContent = screen.banner;
    const retryBtn = doc.createElement('button');
    retryBtn.textContent = 'retry';
    retryBtn.addEventListener('click', retry);
    banner.append(label, retryBtn);
    rootDiv.appendChild(banner);
  }

  if (screen.rejection) {
    const note = doc.createElement('div');
    note.className = 'hd-rejection';
    note.textContent = `refused: ${screen.rejection}`;
    rootDiv.appendChild(note);
  }

  if (screen.terminated) {
    const done = doc.createElement('div');
    done.className = 'hd-done';
    done.textContent = 'Instance terminated.';
    rootDiv.appendChild(done);
  }

  if (screen.root) {
    rootDiv.appendChild(panel(screen.root, send, doc));
  }

  const term = doc.createElement('div');
  term.className = 'hd-terminate';
  term.appendChild(button(screen.terminate, send, doc));
  rootDiv.appendChild(term);

  if (screen.history.length) {
    const log = doc.createElement('pre');
    log.className = 'hd-history';
    log.textContent = screen.history.join('\n');
    rootDiv.appendChild(log);
  }

  container.appendChild(rootDiv);
}
