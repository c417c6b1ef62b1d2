/** Interactive mesh viewport: three.js scene with orbit controls. */

import * as THREE from "three";
import { OrbitControls } from "three/addons/controls/OrbitControls.js";

import { parseObj } from "./obj_parser";

export class MeshViewer {
  private readonly scene = new THREE.Scene();
  private readonly camera: THREE.PerspectiveCamera;
  private readonly renderer: THREE.WebGLRenderer;
  private readonly controls: OrbitControls;
  private mesh: THREE.Mesh | null = null;

  constructor(container: HTMLElement) {
    const width = container.clientWidth || 480;
    const height = container.clientHeight || 480;
    this.camera = new THREE.PerspectiveCamera(45, width / height, 0.1, 5000);
    this.camera.position.set(180, 140, 180);
    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.renderer.setSize(width, height);
    this.renderer.setClearColor(0x10141a);
    container.appendChild(this.renderer.domElement);
    this.controls = new OrbitControls(this.camera, this.renderer.domElement);
    this.controls.enableDamping = true;

    this.scene.add(new THREE.AmbientLight(0xffffff, 0.45));
    const key = new THREE.DirectionalLight(0xffffff, 1.0);
    key.position.set(1, 2, 1.5);
    this.scene.add(key);
    const rim = new THREE.DirectionalLight(0x99bbff, 0.4);
    rim.position.set(-2, -1, -1);
    this.scene.add(rim);

    const animate = () => {
      requestAnimationFrame(animate);
      this.controls.update();
      this.renderer.render(this.scene, this.camera);
    };
    animate();
  }

  showObj(objText: string): void {
    const parsed = parseObj(objText);
    const geometry = new THREE.BufferGeometry();
    geometry.setAttribute("position", new THREE.BufferAttribute(parsed.positions, 3));
    geometry.setIndex(new THREE.BufferAttribute(parsed.indices, 1));
    geometry.computeVertexNormals();
    geometry.center();
    if (this.mesh) {
      this.scene.remove(this.mesh);
      this.mesh.geometry.dispose();
      (this.mesh.material as THREE.Material).dispose();
    }
    const material = new THREE.MeshStandardMaterial({
      color: 0x9b6dd6,
      roughness: 0.55,
      metalness: 0.05,
    });
    this.mesh = new THREE.Mesh(geometry, material);
    this.scene.add(this.mesh);
    const radius = geometry.boundingSphere?.radius ?? 100;
    const dist = radius * 2.6;
    this.camera.position.setLength(Math.max(dist, 10));
    this.controls.target.set(0, 0, 0);
  }
}
