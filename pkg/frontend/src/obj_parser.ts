/** Minimal OBJ parser for the service's v/f meshes (millimeter units). */

export interface ParsedMesh {
  positions: Float32Array; // xyz triples
  indices: Uint32Array;
}

export function parseObj(text: string): ParsedMesh {
  const positions: number[] = [];
  const indices: number[] = [];
  for (const rawLine of text.split("\n")) {
    const line = rawLine.trim();
    if (!line || line.startsWith("#")) continue;
    const parts = line.split(/\s+/);
    if (parts[0] === "v" && parts.length === 4) {
      positions.push(Number(parts[1]), Number(parts[2]), Number(parts[3]));
    } else if (parts[0] === "f" && parts.length === 4) {
      for (let i = 1; i <= 3; i++) {
        const idx = Number.parseInt(parts[i].split("/")[0], 10) - 1;
        if (idx < 0) throw new Error(`bad face index in: ${line}`);
        indices.push(idx);
      }
    }
  }
  const mesh = {
    positions: new Float32Array(positions),
    indices: new Uint32Array(indices),
  };
  const maxIndex = mesh.indices.reduce((a, b) => Math.max(a, b), 0);
  if (mesh.indices.length && maxIndex * 3 >= mesh.positions.length) {
    throw new Error(`face references vertex ${maxIndex + 1} of ${mesh.positions.length / 3}`);
  }
  return mesh;
}
