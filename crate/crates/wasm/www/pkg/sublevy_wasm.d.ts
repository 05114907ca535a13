/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    classification(): string;
    /**
     * Closed-form exponent at the same probe, for comparison with the curve.
     */
    closed_form(u1: number, u2: number): Float64Array;
    /**
     * `[r, Re ρ, Im ρ]` triples for `u = r·(cos a, sin a)`, `r ∈ [0, r_max]`.
     */
    exponent_curve(angle: number, r_max: number, points: number): Float64Array;
    /**
     * `family` is `hnig` (p1 = s, p2 = c), `stable` (p1 = α) or `hvg`
     * (p1 = a); `b` and the diagonal of `Q` are given coordinate-wise.
     */
    constructor(family: string, p1: number, p2: number, b1: number, b2: number, q1: number, q2: number);
    /**
     * Histogram of `⟨v|X(t)⟩` as `[lo, hi, count_0, …]`, range set by the
     * 0.5% and 99.5% sample quantiles so heavy tails do not flatten it.
     */
    projection_histogram(angle: number, t: number, samples: number, bins: number, seed: bigint): Float64Array;
    /**
     * One path on `steps` equal steps up to `t_max`: `[t, x1, x2]` triples.
     */
    sample_path(t_max: number, steps: number, seed: bigint): Float64Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_classification: (a: number) => [number, number];
    readonly demo_closed_form: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demo_exponent_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly demo_new: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
    readonly demo_projection_histogram: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
    readonly demo_sample_path: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
