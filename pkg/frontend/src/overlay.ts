// Accumulated-rate comparison chart: two step-line series (ours vs a tile
// baseline) over the session's own request history.

export interface Point {
  x: number;
  y: number;
}

/** Step-line polyline for a cumulative series, scaled to a canvas box. */
export function stepPolyline(series: number[], width: number, height: number,
                             yMax: number): Point[] {
  if (series.length === 0 || yMax <= 0) {
    return [];
  }
  const dx = width / series.length;
  const pts: Point[] = [];
  let prevY = height;
  for (let i = 0; i < series.length; i++) {
    const y = height - (series[i] / yMax) * height;
    pts.push({ x: i * dx, y: prevY });
    pts.push({ x: i * dx, y });
    pts.push({ x: (i + 1) * dx, y });
    prevY = y;
  }
  return pts;
}

export function drawOverlay(ctx: CanvasRenderingContext2D, width: number,
                            height: number, ours: number[],
                            baseline: number[], baselineTag: string): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#10131a";
  ctx.fillRect(0, 0, width, height);
  if (ours.length === 0) {
    return;
  }
  const yMax = Math.max(ours[ours.length - 1], baseline[baseline.length - 1], 1);
  const draw = (series: number[], color: string) => {
    const pts = stepPolyline(series, width, height, yMax);
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    pts.forEach((p, i) => (i === 0 ? ctx.moveTo(p.x, p.y) : ctx.lineTo(p.x, p.y)));
    ctx.stroke();
  };
  draw(baseline, "#ff6b6b");
  draw(ours, "#5fb3ff");
  ctx.fillStyle = "#c8ccd4";
  ctx.font = "11px sans-serif";
  ctx.fillText(`ours (blue) vs ${baselineTag} (red), accumulated bits`, 6, 12);
}
