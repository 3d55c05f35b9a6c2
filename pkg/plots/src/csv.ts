// CSV readers for the harness outputs. Errors carry the 1-based row number.

import { readFileSync } from 'node:fs';

export class CsvError extends Error {
  constructor(message: string, readonly file: string, readonly row: number) {
    super(`${file}:${row}: ${message}`);
  }
}

export interface Table {
  header: string[];
  /** numeric columns by header name; non-numeric cells are NaN-checked */
  columns: Map<string, number[]>;
  /** raw string cells for label-like columns */
  raw: Map<string, string[]>;
  rows: number;
}

const LABEL_COLUMNS = new Set(['order']);

export function readCsv(path: string, expectedHeader?: string[]): Table {
  let text: string;
  try {
    text = readFileSync(path, 'utf8');
  } catch (err) {
    throw new CsvError(`cannot read file: ${(err as Error).message}`, path, 0);
  }
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new CsvError('empty file', path, 1);
  }
  const header = lines[0].split(',').map((s) => s.trim());
  if (expectedHeader && expectedHeader.join(',') !== header.join(',')) {
    throw new CsvError(
      `unexpected header "${lines[0]}" (want "${expectedHeader.join(',')}")`, path, 1,
    );
  }
  const columns = new Map<string, number[]>(header.map((h) => [h, []]));
  const raw = new Map<string, string[]>(header.map((h) => [h, []]));
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(',');
    if (cells.length !== header.length) {
      throw new CsvError(
        `expected ${header.length} cells, found ${cells.length}`, path, i + 1,
      );
    }
    for (let j = 0; j < header.length; j++) {
      const name = header[j];
      const cell = cells[j].trim();
      raw.get(name)!.push(cell);
      if (LABEL_COLUMNS.has(name)) {
        columns.get(name)!.push(NaN);
        continue;
      }
      if (cell === '') {
        columns.get(name)!.push(NaN); // legitimately blank (first-row order)
        continue;
      }
      const v = Number(cell);
      if (Number.isNaN(v)) {
        throw new CsvError(`invalid number "${cell}" in column ${name}`, path, i + 1);
      }
      columns.get(name)!.push(v);
    }
  }
  return { header, columns, raw, rows: lines.length - 1 };
}
