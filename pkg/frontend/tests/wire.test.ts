// Contract fidelity: the client types mirror the published JSON schemas.
// Golden fixtures must validate against a zod mirror of the contract, and
// the mirror's shape is cross-checked against the schema files so drift on
// either side fails CI.

import { readFileSync, readdirSync } from 'node:fs';
import { join } from 'node:path';
import { describe, expect, it } from 'vitest';
import { z } from 'zod';

const SCHEMA_DIR = join(__dirname, '..', '..', 'docs', 'schemas');
const FIXTURE_DIR = join(__dirname, 'fixtures');

const encodingSchema = z.object({
  field: z.string(),
  semantic_type: z.enum(['quantitative', 'categorical', 'temporal', 'boolean', 'unknown']),
  aggregate: z.enum(['none', 'sum', 'avg', 'count', 'min', 'max']),
  bin: z.number().int().nullable().optional(),
  sort: z.enum(['asc', 'desc']).nullable().optional(),
}).strict();

const chartSpecSchema = z.object({
  chart_id: z.string().min(1),
  mark: z.enum(['bar', 'line', 'area', 'scatter', 'histogram', 'heatmap', 'pie']),
  encodings: z.record(
    z.enum(['x', 'y', 'color', 'size', 'row_facet']),
    encodingSchema,
  ),
  title: z.string(),
  style: z.object({
    palette: z.string(),
    mark_color: z.string().nullable().optional(),
    x_label: z.string().nullable().optional(),
    y_label: z.string().nullable().optional(),
  }).strict(),
  data: z.object({
    fields: z.array(z.string()),
    values: z.record(z.string(), z.array(z.union([z.string(), z.number(), z.boolean(), z.null()]))),
  }).strict(),
  source_sql: z.string(),
  revision: z.number().int().min(0),
}).strict();

function publishedSchema(name: string): Record<string, unknown> {
  return JSON.parse(readFileSync(join(SCHEMA_DIR, name), 'utf-8'));
}

describe('wire contract', () => {
  it('every golden fixture validates against the zod mirror', () => {
    const files = readdirSync(FIXTURE_DIR).filter((f) => f.endsWith('.json'));
    expect(files.length).toBe(7);
    for (const file of files) {
      const fixture = JSON.parse(readFileSync(join(FIXTURE_DIR, file), 'utf-8'));
      const parsed = chartSpecSchema.safeParse(fixture);
      expect(parsed.success, `${file}: ${JSON.stringify(parsed.error?.issues)}`).toBe(true);
    }
  });

  it('zod mirror keys match the published chart_spec schema (drift check)', () => {
    const published = publishedSchema('chart_spec.schema.json') as {
      properties: Record<string, unknown>;
      required: string[];
      definitions: { encoding: { properties: Record<string, unknown> } };
    };
    const mirrorKeys = Object.keys(chartSpecSchema.shape).sort();
    expect(Object.keys(published.properties).sort()).toEqual(mirrorKeys);
    expect(published.required.sort()).toEqual(mirrorKeys); // all top-level fields required
    const encodingKeys = Object.keys(encodingSchema.shape).sort();
    expect(Object.keys(published.definitions.encoding.properties).sort())
      .toEqual(encodingKeys);
  });

  it('published mark and aggregate enums match the client enums', () => {
    const published = publishedSchema('chart_spec.schema.json') as {
      properties: { mark: { enum: string[] } };
      definitions: { encoding: { properties: { aggregate: { enum: string[] } } } };
    };
    expect(published.properties.mark.enum).toEqual(
      ['bar', 'line', 'area', 'scatter', 'histogram', 'heatmap', 'pie']);
    expect(published.definitions.encoding.properties.aggregate.enum).toEqual(
      ['none', 'sum', 'avg', 'count', 'min', 'max']);
  });

  it('rejects drifted payloads', () => {
    const fixture = JSON.parse(readFileSync(join(FIXTURE_DIR, 'bar.json'), 'utf-8'));
    fixture.surprise = true;
    expect(chartSpecSchema.safeParse(fixture).success).toBe(false);
  });
});
