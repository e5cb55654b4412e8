/* tslint:disable */
/* eslint-disable */

/**
 * Outcome of one burst.
 */
export class Loopback {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly bits: number;
    /**
     * Bit errors for FNFT, I-FNFT, DF-FNFT and DF-BNFT.
     */
    readonly errors: Uint32Array;
    /**
     * FNFT pre-slicer samples as `[re, im, re, im, ..]`.
     */
    readonly samples: Float64Array;
}

/**
 * `|rho(lambda)|` of `amp exp(-t^2 / (2 width^2))` next to the linear
 * prediction `|FT|`, as `[lambda.., |rho|.., |FT|..]`.
 */
export function gaussian_spectrum(amp: number, width: number): Float64Array;

/**
 * One random QPSK burst of `n_info` symbols over `length_km` of fiber.
 */
export function loopback(n_info: number, power_dbm: number, length_km: number, noise: boolean, seed: number): Loopback;

/**
 * `Q^2` in dB for a bit-error probability.
 */
export function q_factor_db(ber: number): number;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_loopback_free: (a: number, b: number) => void;
    readonly gaussian_spectrum: (a: number, b: number) => [number, number, number, number];
    readonly loopback: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly loopback_bits: (a: number) => number;
    readonly loopback_errors: (a: number) => [number, number];
    readonly loopback_samples: (a: number) => [number, number];
    readonly q_factor_db: (a: number) => number;
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
