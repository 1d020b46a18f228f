import { GatewayClient } from './api.js';
import { ExplorerSession } from './controller.js';
import { CSS, renderScreen } from './dom.js';

// Entry point: ?api=http://host:port selects the gateway (default: this
// host on port 8173), ?instance=iN attaches to an existing instance,
// ?model=Name creates a fresh one.

function param(name: string): string | null {
  return new URLSearchParams(window.location.search).get(name);
}

async function bootstrap(): Promise<void> {
  const style = document.createElement('style');
  style.textContent = CSS;
  document.head.appendChild(style);
  const container = document.getElementById('app');
  if (!container) {
    throw new Error('missing #app container');
  }

  const api = param('api') ?? `http://${window.location.hostname || '127.0.0.1'}:8173`;
  const client = new GatewayClient(api);

  let instanceId = param('instance');
  if (!instanceId) {
    const model = param('model');
    if (!model) {
      const models = await client.listModels();
      container.textContent = models.length
        ? `No instance selected. Add ?model=NAME (known models: ${models.join(', ')}) ` +
          'or ?instance=ID to the URL.'
        : 'The gateway has no models yet. POST one to /models, then reload.';
      return;
    }
    const snapshot = await client.createInstance(model);
    instanceId = snapshot.id;
  }

  const session = new ExplorerSession(client, instanceId);
  session.subscribe((screen) => {
    renderScreen(
      screen,
      container,
      (command) => void session.send(command),
      () => void session.refresh(),
    );
  });
  await session.refresh();
}

void bootstrap();
