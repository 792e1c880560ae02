/* tslint:disable */
/* eslint-disable */

/**
 * Runs the gait with fixed raw network outputs `(o1, o2)`; returns JSON
 * with the trajectory SVG and episode numbers.
 */
export function gait_rollout(preset: string, o1: number, o2: number, seconds: number, yaw_limit_deg: number): string;

/**
 * SVG of the arena with the 120 sensor rays the controller sees from
 * `(x, y)` with the head pointing `heading_deg` from +x.
 */
export function lidar_scan(preset: string, x: number, y: number, heading_deg: number): string;

/**
 * Builds one untrained NEAT genome from `seed` and runs it as the controller.
 */
export function random_controller(preset: string, seed: bigint, seconds: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly gait_rollout: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly lidar_scan: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly random_controller: (a: number, b: number, c: bigint, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
