// Wire contract types, mirroring the server's published JSON schemas
// (docs/schemas/*.schema.json). The drift test keeps these in sync.

export type Mark =
  | 'bar'
  | 'line'
  | 'area'
  | 'scatter'
  | 'histogram'
  | 'heatmap'
  | 'pie';

export type SemanticType =
  | 'quantitative'
  | 'categorical'
  | 'temporal'
  | 'boolean'
  | 'unknown';

export type Aggregate = 'none' | 'sum' | 'avg' | 'count' | 'min' | 'max';

export interface Encoding {
  field: string;
  semantic_type: SemanticType;
  aggregate: Aggregate;
  bin?: number | null;
  sort?: 'asc' | 'desc' | null;
}

export interface ChartStyle {
  palette: string;
  mark_color?: string | null;
  x_label?: string | null;
  y_label?: string | null;
}

export interface DataBlock {
  fields: string[];
  values: Record<string, Array<string | number | boolean | null>>;
}

export interface ChartSpec {
  chart_id: string;
  mark: Mark;
  encodings: Partial<Record<'x' | 'y' | 'color' | 'size' | 'row_facet', Encoding>>;
  title: string;
  style: ChartStyle;
  data: DataBlock;
  source_sql: string;
  revision: number;
}

export interface TrendFinding {
  kind: 'trend';
  field: string;
  slope: number;
  intercept: number;
  r2: number;
  direction: 'increasing' | 'decreasing';
  per_day?: boolean;
}

export interface AnomalyFinding {
  kind: 'anomaly';
  field: string;
  row_index: number;
  value: number;
  score: number;
  rule: 'mad' | 'mad_degenerate';
}

export interface CorrelationFinding {
  kind: 'correlation';
  field_a: string;
  field_b: string;
  r: number;
  n: number;
}

export type Finding = TrendFinding | AnomalyFinding | CorrelationFinding;

export interface InsightReport {
  findings: Finding[];
  narrative: string;
  source_sql: string;
}

export interface Explanation {
  text: string;
  citations: string[];
  insight_digest: string;
  grounded: boolean;
}

export interface ResponseBundle {
  message: string;
  charts: ChartSpec[];
  insight: InsightReport | null;
  explanation: Explanation | null;
  errors: Array<[string, string]>;
}

export interface HistoryEntry {
  message: { text: string; received_at: string };
  response: ResponseBundle;
}

export interface StateView {
  session_id: string;
  history: HistoryEntry[];
  charts: ChartSpec[];
  insights: InsightReport[];
  connection: { dialect: string; location: string; read_only: boolean } | null;
}

export interface TableSummary {
  name: string;
  columns: number;
  rows: number;
}

export interface ConnectionSummary {
  dialect: string;
  tables: TableSummary[];
  fetched_at: string;
}
