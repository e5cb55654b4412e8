/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_loopback_free: (a: number, b: number) => void;
export const gaussian_spectrum: (a: number, b: number) => [number, number, number, number];
export const loopback: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const loopback_bits: (a: number) => number;
export const loopback_errors: (a: number) => [number, number];
export const loopback_samples: (a: number) => [number, number];
export const q_factor_db: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
