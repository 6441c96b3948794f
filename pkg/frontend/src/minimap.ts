// Equirectangular minimap: shades decoded blocks, outlines access blocks.

export interface Cell {
  x: number;
  y: number;
  w: number;
  h: number;
}

export function blockCell(idx: number, rows: number, cols: number,
                          width: number, height: number): Cell {
  const r = Math.floor(idx / cols);
  const c = idx % cols;
  return {
    x: (c * width) / cols,
    y: (r * height) / rows,
    w: width / cols,
    h: height / rows,
  };
}

export function drawMinimap(ctx: CanvasRenderingContext2D, width: number,
                            height: number, rows: number, cols: number,
                            decoded: Uint8Array, access: number[]): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#1b1f27";
  ctx.fillRect(0, 0, width, height);
  ctx.fillStyle = "rgba(95, 179, 255, 0.65)";
  for (let i = 0; i < decoded.length; i++) {
    if (decoded[i]) {
      const cell = blockCell(i, rows, cols, width, height);
      ctx.fillRect(cell.x, cell.y, cell.w, cell.h);
    }
  }
  ctx.strokeStyle = "#ffb454";
  ctx.lineWidth = 1;
  for (const b of access) {
    const cell = blockCell(b, rows, cols, width, height);
    ctx.strokeRect(cell.x + 0.5, cell.y + 0.5, cell.w - 1, cell.h - 1);
  }
}
