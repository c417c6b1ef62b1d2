/**
 * Mask editing state: a 64x64 binary grid, brush-stroke rasterization and a
 * snapshot-based undo/redo history. Everything here is DOM-free so the
 * editing logic can be tested headless; the canvas layer only renders it.
 */

export const MASK_DIM = 64;

export type BrushMode = "paint" | "erase";

export interface StrokePoint {
  x: number; // logical column, may be fractional
  y: number; // logical row
}

export interface BrushStroke {
  mode: BrushMode;
  radius: number; // logical pixels
  path: StrokePoint[];
}

export class MaskGrid {
  readonly dim: number;
  data: Uint8Array;

  constructor(dim: number = MASK_DIM, data?: Uint8Array) {
    this.dim = dim;
    this.data = data ?? new Uint8Array(dim * dim);
    if (this.data.length !== dim * dim) throw new Error(`mask data must hold ${dim * dim} cells`);
  }

  get(row: number, col: number): number {
    return this.data[row * this.dim + col];
  }

  set(row: number, col: number, value: 0 | 1): void {
    this.data[row * this.dim + col] = value;
  }

  clone(): MaskGrid {
    return new MaskGrid(this.dim, this.data.slice());
  }

  isEmpty(): boolean {
    return this.data.every((v) => v === 0);
  }

  count(): number {
    let n = 0;
    for (const v of this.data) n += v;
    return n;
  }

  equals(other: MaskGrid): boolean {
    if (other.dim !== this.dim) return false;
    for (let i = 0; i < this.data.length; i++) if (this.data[i] !== other.data[i]) return false;
    return true;
  }

  /** Rasterize a stroke: stamp a disk at each interpolated path position. */
  applyStroke(stroke: BrushStroke): void {
    const value = stroke.mode === "paint" ? 1 : 0;
    const r = Math.max(0, stroke.radius);
    const stamp = (cx: number, cy: number) => {
      const lo = Math.max(0, Math.floor(cy - r));
      const hi = Math.min(this.dim - 1, Math.ceil(cy + r));
      for (let row = lo; row <= hi; row++) {
        const left = Math.max(0, Math.floor(cx - r));
        const right = Math.min(this.dim - 1, Math.ceil(cx + r));
        for (let col = left; col <= right; col++) {
          const dx = col - cx;
          const dy = row - cy;
          if (dx * dx + dy * dy <= r * r) this.set(row, col, value);
        }
      }
    };
    for (let i = 0; i < stroke.path.length; i++) {
      const p = stroke.path[i];
      if (i === 0) {
        stamp(p.x, p.y);
        continue;
      }
      const q = stroke.path[i - 1];
      const dist = Math.hypot(p.x - q.x, p.y - q.y);
      const steps = Math.max(1, Math.ceil(dist * 2)); // <= half-pixel spacing
      for (let s = 1; s <= steps; s++) {
        const t = s / steps;
        stamp(q.x + (p.x - q.x) * t, q.y + (p.y - q.y) * t);
      }
    }
  }
}

/** Undo/redo over full-mask snapshots; 4 KiB per entry keeps this trivial. */
export class MaskHistory {
  current: MaskGrid;
  private past: Uint8Array[] = [];
  private future: Uint8Array[] = [];

  constructor(dim: number = MASK_DIM) {
    this.current = new MaskGrid(dim);
  }

  apply(stroke: BrushStroke): void {
    this.past.push(this.current.data.slice());
    this.future = [];
    this.current.applyStroke(stroke);
  }

  clear(): void {
    if (this.current.isEmpty()) return;
    this.past.push(this.current.data.slice());
    this.future = [];
    this.current = new MaskGrid(this.current.dim);
  }

  canUndo(): boolean {
    return this.past.length > 0;
  }

  canRedo(): boolean {
    return this.future.length > 0;
  }

  undo(): boolean {
    const prev = this.past.pop();
    if (!prev) return false;
    this.future.push(this.current.data.slice());
    this.current = new MaskGrid(this.current.dim, prev);
    return true;
  }

  redo(): boolean {
    const next = this.future.pop();
    if (!next) return false;
    this.past.push(this.current.data.slice());
    this.current = new MaskGrid(this.current.dim, next);
    return true;
  }
}
