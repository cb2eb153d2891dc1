/* tslint:disable */
/* eslint-disable */

export function gapCurve(n: number, seed: number, gamma: number, c: number): Float64Array;

export function pointBands(xs: Float64Array, ys: Float64Array, gamma: number, c: number, epsilon: number, lo: number, hi: number, grid_points: number): Float64Array;

export function sincBands(n: number, seed: number, gamma: number, c: number, epsilon: number, grid_points: number): Float64Array;

/**
 * `x, y` pairs of the seeded sinc sample.
 */
export function sincSample(n: number, seed: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly gapCurve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly pointBands: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number, number, number];
    readonly sincBands: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly sincSample: (a: number, b: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
