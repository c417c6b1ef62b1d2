/**
 * Binary PGM (P5) encode/decode matching the service's wire format byte for
 * byte: masks are 8-bit with maxval 255, topograms 16-bit big-endian with
 * maxval 65535, values normalized to [0, 1] on load.
 */

export interface PgmImage {
  width: number;
  height: number;
  maxval: number;
  values: Float32Array; // row-major, [0, 1]
}

export function parsePgm(bytes: Uint8Array): PgmImage {
  if (bytes.length < 2 || bytes[0] !== 0x50 || bytes[1] !== 0x35) {
    throw new Error("not a binary PGM (P5) file");
  }
  let pos = 2;
  const tokens: string[] = [];
  while (tokens.length < 3) {
    while (pos < bytes.length && isSpace(bytes[pos])) pos++;
    if (pos >= bytes.length) throw new Error("PGM header ended early");
    if (bytes[pos] === 0x23) {
      while (pos < bytes.length && bytes[pos] !== 0x0a) pos++;
      pos++;
      continue;
    }
    const start = pos;
    while (pos < bytes.length && !isSpace(bytes[pos])) pos++;
    tokens.push(String.fromCharCode(...bytes.subarray(start, pos)));
  }
  pos++; // exactly one whitespace byte after maxval
  const [width, height, maxval] = tokens.map((t) => Number.parseInt(t, 10));
  if (!(width > 0 && height > 0)) throw new Error(`bad PGM dimensions ${width}x${height}`);
  if (maxval !== 255 && maxval !== 65535) throw new Error(`unsupported PGM maxval ${maxval}`);
  const itemsize = maxval === 65535 ? 2 : 1;
  const need = width * height * itemsize;
  const raw = bytes.subarray(pos);
  if (raw.length < need) throw new Error(`PGM payload holds ${raw.length} bytes, header promises ${need}`);
  const values = new Float32Array(width * height);
  if (itemsize === 1) {
    for (let i = 0; i < values.length; i++) values[i] = raw[i] / 255;
  } else {
    for (let i = 0; i < values.length; i++) values[i] = ((raw[2 * i] << 8) | raw[2 * i + 1]) / 65535;
  }
  return { width, height, maxval, values };
}

/** Serialize a binary mask grid exactly as the service's writer does. */
export function encodeMaskPgm(data: Uint8Array, dim: number): Uint8Array {
  const header = `P5\n${dim} ${dim}\n255\n`;
  const out = new Uint8Array(header.length + dim * dim);
  for (let i = 0; i < header.length; i++) out[i] = header.charCodeAt(i);
  for (let i = 0; i < data.length; i++) out[header.length + i] = data[i] ? 255 : 0;
  return out;
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d;
}

export function bytesToBase64(bytes: Uint8Array): string {
  let binary = "";
  const chunk = 0x8000;
  for (let i = 0; i < bytes.length; i += chunk) {
    binary += String.fromCharCode(...bytes.subarray(i, i + chunk));
  }
  return btoa(binary);
}

export function base64ToBytes(b64: string): Uint8Array {
  const binary = atob(b64);
  const out = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) out[i] = binary.charCodeAt(i);
  return out;
}
