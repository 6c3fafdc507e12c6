/* tslint:disable */
/* eslint-disable */

/**
 * `sup |Delta_ell f|` for `ell = -1, 0, 1, ...` of the same sample.
 */
export function block_sup_norms(cutoff: number, gamma: number, seed: bigint): Float64Array;

/**
 * Point values of a real sample with `sigma^2 = |k|^gamma`, on `points`
 * equispaced points of `[0, 2 pi)`.
 */
export function sample_field(cutoff: number, gamma: number, seed: bigint, points: number): Float64Array;

/**
 * Solves the two-component antisymmetric equation from white-noise data at
 * cutoff `n` up to `T = (log n)^{-m}` and returns `[t, |Pi_0 u_t|, |I_t|]`
 * triples. `adversarial` selects the rotated pair, otherwise the pair is
 * independent and `I_t` is reported as zero.
 */
export function zero_mode_path(n: number, m: number, seed: bigint, adversarial: boolean): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly block_sup_norms: (a: number, b: number, c: bigint) => [number, number, number, number];
    readonly sample_field: (a: number, b: number, c: bigint, d: number) => [number, number, number, number];
    readonly zero_mode_path: (a: number, b: number, c: bigint, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
