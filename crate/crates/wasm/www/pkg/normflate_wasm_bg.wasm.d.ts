/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const block_sup_norms: (a: number, b: number, c: bigint) => [number, number, number, number];
export const sample_field: (a: number, b: number, c: bigint, d: number) => [number, number, number, number];
export const zero_mode_path: (a: number, b: number, c: bigint, d: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
