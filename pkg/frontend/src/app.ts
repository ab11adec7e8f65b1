// Chat UI wiring: transcript, connection form, chart rendering, exports.
// Server state is the source of truth; reloading the page replays the
// transcript from GET /state.

import { ApiError, Client } from './api.js';
import { chartSpecProblems } from './guards.js';
import { chartToSvg } from './svg.js';
import type { ChartSpec, ResponseBundle } from './types.js';

const SESSION_KEY = 'datachat.session_id';

interface Ui {
  transcript: HTMLElement;
  input: HTMLInputElement;
  send: HTMLButtonElement;
  form: HTMLFormElement;
  dialect: HTMLSelectElement;
  location: HTMLInputElement;
  readOnly: HTMLInputElement;
  banner: HTMLElement;
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function div(className: string, html?: string): HTMLDivElement {
  const node = document.createElement('div');
  node.className = className;
  if (html !== undefined) node.innerHTML = html;
  return node;
}

function textDiv(className: string, text: string): HTMLDivElement {
  const node = document.createElement('div');
  node.className = className;
  node.textContent = text;
  return node;
}

export class App {
  private client: Client;
  private ui: Ui;
  private sessionId = '';
  private busy = false;
  selectedChart: string | null = null;

  constructor(client: Client, ui: Ui) {
    this.client = client;
    this.ui = ui;
  }

  async start(): Promise<void> {
    const saved = window.localStorage.getItem(SESSION_KEY);
    if (saved) {
      try {
        await this.restore(saved);
        return;
      } catch {
        window.localStorage.removeItem(SESSION_KEY);
      }
    }
    const created = await this.client.createSession();
    this.sessionId = created.session_id;
    window.localStorage.setItem(SESSION_KEY, this.sessionId);
  }

  private async restore(sessionId: string): Promise<void> {
    const state = await this.client.getState(sessionId);
    this.sessionId = sessionId;
    this.ui.transcript.innerHTML = '';
    for (const entry of state.history) {
      this.appendUser(entry.message.text);
      this.appendBundle(entry.response);
    }
    if (state.connection) {
      this.ui.banner.textContent =
        `Connected (${state.connection.dialect}): ${state.connection.location}`;
    }
  }

  private setBusy(busy: boolean): void {
    this.busy = busy;
    this.ui.input.disabled = busy;
    this.ui.send.disabled = busy;
  }

  private appendUser(text: string): void {
    this.ui.transcript.appendChild(textDiv('turn user', text));
    this.scroll();
  }

  appendBundle(bundle: ResponseBundle): void {
    const host = div('turn assistant');
    host.appendChild(textDiv('text', bundle.message));
    for (const chart of bundle.charts) {
      host.appendChild(this.chartCard(chart));
      this.selectedChart = chart.chart_id;
    }
    if (bundle.explanation && bundle.explanation.citations.length) {
      const links = div('citations');
      links.appendChild(textDiv('label', 'Sources:'));
      for (const url of bundle.explanation.citations) {
        const a = document.createElement('a');
        a.href = url;
        a.textContent = url;
        a.target = '_blank';
        a.rel = 'noopener';
        links.appendChild(a);
      }
      host.appendChild(links);
    }
    if (bundle.errors.length) {
      for (const [code, message] of bundle.errors) {
        host.appendChild(textDiv('error-card', `${code}: ${message}`));
      }
    }
    this.ui.transcript.appendChild(host);
    this.scroll();
  }

  chartCard(chart: ChartSpec): HTMLElement {
    const card = div('chart-card');
    const problems = chartSpecProblems(chart);
    if (problems.length) {
      card.appendChild(textDiv('error-card',
        `Chart cannot be rendered: ${problems.join('; ')}`));
      return card;
    }
    card.innerHTML = chartToSvg(chart);
    const bar = div('chart-actions');
    for (const format of ['json', 'csv'] as const) {
      const link = document.createElement('a');
      link.href = this.client.exportUrl(this.sessionId, chart.chart_id, format);
      link.textContent = `export ${format}`;
      link.className = 'export';
      link.setAttribute('download', `${chart.chart_id}.${format}`);
      bar.appendChild(link);
    }
    card.appendChild(bar);
    return card;
  }

  async send(text: string): Promise<void> {
    const trimmed = text.trim();
    if (!trimmed || this.busy) return;
    this.appendUser(trimmed);
    this.ui.input.value = '';
    this.setBusy(true);
    try {
      const bundle = await this.client.sendMessage(this.sessionId, trimmed);
      this.appendBundle(bundle);
    } catch (err) {
      const card = div('turn assistant');
      const message = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
      card.appendChild(textDiv('error-card', message));
      const retry = document.createElement('button');
      retry.textContent = 'Retry';
      retry.addEventListener('click', () => {
        card.remove();
        void this.send(trimmed);
      });
      card.appendChild(retry);
      this.ui.transcript.appendChild(card);
      this.scroll();
    } finally {
      this.setBusy(false);
    }
  }

  async connect(): Promise<void> {
    if (!this.ui.readOnly.checked) {
      this.ui.banner.textContent = 'Connections must be read-only.';
      return;
    }
    const dialect = this.ui.dialect.value;
    const location = this.ui.location.value.trim();
    if (!location) return;
    try {
      const summary = await this.client.registerConnection(this.sessionId, dialect, location);
      const tables = summary.tables
        .map((t) => `${t.name} (${t.columns} columns, ${t.rows} rows)`)
        .join(', ');
      this.ui.banner.textContent = `Connected (${summary.dialect}): ${tables || 'no tables'}`;
    } catch (err) {
      const message = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
      this.ui.banner.textContent = message;
    }
  }

  private scroll(): void {
    this.ui.transcript.scrollTop = this.ui.transcript.scrollHeight;
  }
}

export function boot(): void {
  const ui: Ui = {
    transcript: el('transcript'),
    input: el<HTMLInputElement>('message'),
    send: el<HTMLButtonElement>('send'),
    form: el<HTMLFormElement>('connection-form'),
    dialect: el<HTMLSelectElement>('dialect'),
    location: el<HTMLInputElement>('location'),
    readOnly: el<HTMLInputElement>('read-only'),
    banner: el('banner'),
  };
  const app = new App(new Client(''), ui);
  ui.send.addEventListener('click', () => void app.send(ui.input.value));
  ui.input.addEventListener('keydown', (event) => {
    if (event.key === 'Enter') void app.send(ui.input.value);
  });
  ui.form.addEventListener('submit', (event) => {
    event.preventDefault();
    void app.connect();
  });
  void app.start();
}

if (typeof document !== 'undefined' && document.getElementById('transcript')) {
  boot();
}
