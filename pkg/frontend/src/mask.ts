/**
 * Region mask edited at native image resolution. Values are 0/1 per pixel;
 * the server receives it as an 8-bit grayscale PNG where white (255) marks
 * attackable pixels.
 */

import { decodePng, encodeGray8 } from "./png.js";

export class MaskBitmap {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array;

  constructor(width: number, height: number, data?: Uint8Array) {
    if (width <= 0 || height <= 0) {
      throw new Error(`bad mask size ${width}x${height}`);
    }
    if (data !== undefined && data.length !== width * height) {
      throw new Error("mask buffer does not match its dimensions");
    }
    this.width = width;
    this.height = height;
    this.data = data ?? new Uint8Array(width * height);
  }

  get(x: number, y: number): number {
    return this.data[y * this.width + x];
  }

  set(x: number, y: number, value: 0 | 1): void {
    if (x >= 0 && x < this.width && y >= 0 && y < this.height) {
      this.data[y * this.width + x] = value;
    }
  }

  /** Pixels inside the dragged rectangle become 1. Corners may arrive in any
   * order and are clamped to the image; a zero-area drag is ignored. */
  paintRect(x0: number, y0: number, x1: number, y1: number): void {
    if (x0 === x1 && y0 === y1) return;
    const left = Math.max(0, Math.floor(Math.min(x0, x1)));
    const top = Math.max(0, Math.floor(Math.min(y0, y1)));
    const right = Math.min(this.width - 1, Math.ceil(Math.max(x0, x1)) - 1);
    const bottom = Math.min(this.height - 1, Math.ceil(Math.max(y0, y1)) - 1);
    for (let y = top; y <= bottom; y++) {
      for (let x = left; x <= right; x++) {
        this.data[y * this.width + x] = 1;
      }
    }
  }

  /** Stamp one brush disk: integer pixels within radius of the center. */
  stampDisk(cx: number, cy: number, radius: number, value: 0 | 1): void {
    const r = Math.max(0, radius);
    const r2 = r * r;
    for (let y = Math.floor(cy - r); y <= Math.ceil(cy + r); y++) {
      for (let x = Math.floor(cx - r); x <= Math.ceil(cx + r); x++) {
        const dx = x - cx;
        const dy = y - cy;
        if (dx * dx + dy * dy <= r2) this.set(x, y, value);
      }
    }
  }

  /** Union disks along a stroke path (erase clears instead). */
  brush(points: Array<[number, number]>, radius: number, erase = false): void {
    const value = erase ? 0 : 1;
    for (let i = 0; i < points.length; i++) {
      const [x, y] = points[i];
      this.stampDisk(x, y, radius, value);
      if (i > 0) {
        // fill gaps between sampled pointer positions
        const [px, py] = points[i - 1];
        const steps = Math.ceil(Math.hypot(x - px, y - py));
        for (let s = 1; s < steps; s++) {
          this.stampDisk(px + ((x - px) * s) / steps,
                         py + ((y - py) * s) / steps, radius, value);
        }
      }
    }
  }

  clear(): void {
    this.data.fill(0);
  }

  count(): number {
    let n = 0;
    for (const v of this.data) n += v;
    return n;
  }

  clone(): MaskBitmap {
    return new MaskBitmap(this.width, this.height, this.data.slice());
  }

  equals(other: MaskBitmap): boolean {
    if (other.width !== this.width || other.height !== this.height) return false;
    return this.data.every((v, i) => v === other.data[i]);
  }

  async toPng(): Promise<Uint8Array> {
    const gray = new Uint8Array(this.data.length);
    for (let i = 0; i < gray.length; i++) gray[i] = this.data[i] ? 255 : 0;
    return encodeGray8(gray, this.width, this.height);
  }

  static async fromPng(bytes: Uint8Array): Promise<MaskBitmap> {
    const { width, height, channels, pixels } = await decodePng(bytes);
    const data = new Uint8Array(width * height);
    for (let i = 0; i < data.length; i++) {
      data[i] = pixels[i * channels] >= 128 ? 1 : 0;
    }
    return new MaskBitmap(width, height, data);
  }
}

export function toBase64(bytes: Uint8Array): string {
  let binary = "";
  for (const b of bytes) binary += String.fromCharCode(b);
  return btoa(binary);
}

export function fromBase64(text: string): Uint8Array {
  const binary = atob(text);
  const out = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) out[i] = binary.charCodeAt(i);
  return out;
}
