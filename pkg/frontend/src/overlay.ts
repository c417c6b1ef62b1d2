/**
 * 2D canvas rendering: grayscale topogram, the editable mask and the
 * returned projection, both upscaled nearest-neighbor so logical pixel
 * (row, col) of the 64x64 grids maps exactly onto the matching topogram
 * block and no resampling drift can appear.
 */

import { MaskGrid } from "./mask_state";
import { PgmImage } from "./pgm";

export function drawTopogram(ctx: CanvasRenderingContext2D, image: PgmImage, scale: number): void {
  const out = ctx.createImageData(image.width * scale, image.height * scale);
  for (let y = 0; y < out.height; y++) {
    const row = Math.floor(y / scale);
    for (let x = 0; x < out.width; x++) {
      const v = Math.round(image.values[row * image.width + Math.floor(x / scale)] * 255);
      const o = (y * out.width + x) * 4;
      out.data[o] = out.data[o + 1] = out.data[o + 2] = v;
      out.data[o + 3] = 255;
    }
  }
  ctx.putImageData(out, 0, 0);
}

function blendCells(
  ctx: CanvasRenderingContext2D,
  test: (row: number, col: number) => boolean,
  dim: number,
  cell: number,
  rgba: [number, number, number, number],
): void {
  ctx.save();
  ctx.fillStyle = `rgba(${rgba[0]},${rgba[1]},${rgba[2]},${rgba[3]})`;
  for (let row = 0; row < dim; row++) {
    for (let col = 0; col < dim; col++) {
      if (test(row, col)) ctx.fillRect(col * cell, row * cell, cell, cell);
    }
  }
  ctx.restore();
}

export function drawMask(ctx: CanvasRenderingContext2D, mask: MaskGrid, cell: number, alpha: number): void {
  blendCells(ctx, (r, c) => mask.get(r, c) !== 0, mask.dim, cell, [80, 200, 120, alpha]);
}

export function drawProjection(
  ctx: CanvasRenderingContext2D,
  projection: PgmImage,
  cell: number,
  alpha: number,
): void {
  blendCells(
    ctx,
    (r, c) => projection.values[r * projection.width + c] >= 0.5,
    projection.width,
    cell,
    [186, 130, 255, alpha],
  );
}
