/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const planted_scatter: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
export const quantizer_curve: (a: number, b: number, c: number) => [number, number, number, number];
export const storage_profile: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
