// Runtime validation of incoming chart specs. Rendering only proceeds on a
// clean spec; any problem becomes an inline error card instead of a crash.

import type { ChartSpec, Mark } from './types.js';

export const MARKS: readonly Mark[] = [
  'bar', 'line', 'area', 'scatter', 'histogram', 'heatmap', 'pie',
];

const CHANNELS = ['x', 'y', 'color', 'size', 'row_facet'];
const AGGREGATES = ['none', 'sum', 'avg', 'count', 'min', 'max'];

export function chartSpecProblems(raw: unknown): string[] {
  const problems: string[] = [];
  if (typeof raw !== 'object' || raw === null || Array.isArray(raw)) {
    return ['spec is not an object'];
  }
  const spec = raw as Record<string, unknown>;
  if (typeof spec.chart_id !== 'string' || !spec.chart_id) {
    problems.push('chart_id missing');
  }
  if (!MARKS.includes(spec.mark as Mark)) {
    problems.push(`unknown mark ${JSON.stringify(spec.mark)}`);
  }
  if (typeof spec.title !== 'string') problems.push('title missing');
  if (typeof spec.revision !== 'number') problems.push('revision missing');

  const data = spec.data as { fields?: unknown; values?: unknown } | undefined;
  if (!data || !Array.isArray(data.fields) || typeof data.values !== 'object' || data.values === null) {
    problems.push('data block malformed');
    return problems;
  }
  const values = data.values as Record<string, unknown>;
  let length = -1;
  for (const field of data.fields) {
    if (typeof field !== 'string') {
      problems.push('field names must be strings');
      continue;
    }
    const column = values[field];
    if (!Array.isArray(column)) {
      problems.push(`data values missing for field ${field}`);
      continue;
    }
    if (length === -1) length = column.length;
    else if (column.length !== length) problems.push(`ragged column ${field}`);
  }

  const encodings = spec.encodings as Record<string, { field?: unknown; aggregate?: unknown }> | undefined;
  if (!encodings || typeof encodings !== 'object') {
    problems.push('encodings missing');
    return problems;
  }
  for (const [channel, encoding] of Object.entries(encodings)) {
    if (!CHANNELS.includes(channel)) problems.push(`unknown channel ${channel}`);
    if (!encoding || typeof encoding.field !== 'string') {
      problems.push(`channel ${channel} lacks a field`);
    } else if (!(data.fields as string[]).includes(encoding.field)) {
      problems.push(`channel ${channel} encodes missing field ${encoding.field}`);
    }
    if (encoding && encoding.aggregate !== undefined && !AGGREGATES.includes(encoding.aggregate as string)) {
      problems.push(`channel ${channel} has bad aggregate`);
    }
  }
  return problems;
}

export function isChartSpec(raw: unknown): raw is ChartSpec {
  return chartSpecProblems(raw).length === 0;
}
