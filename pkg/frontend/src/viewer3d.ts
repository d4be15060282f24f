/** three.js wrapper: fused mesh with per-face colors and drag-orbit. */

import * as THREE from "three";

import { vertexColors } from "./color.js";
import type { MeshPayload } from "./api.js";

export class MeshViewer {
  private readonly renderer: THREE.WebGLRenderer;
  private readonly scene: THREE.Scene;
  private readonly camera: THREE.PerspectiveCamera;
  private mesh: THREE.Mesh | null = null;
  private azimuth = 0.6;
  private elevation = 0.3;
  private radius = 2.8;

  constructor(private readonly canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.renderer.setSize(canvas.clientWidth || 480, canvas.clientHeight || 360, false);
    this.scene = new THREE.Scene();
    this.scene.background = new THREE.Color(0x101014);
    this.camera = new THREE.PerspectiveCamera(
      45,
      (canvas.clientWidth || 480) / (canvas.clientHeight || 360),
      0.01,
      100,
    );
    const light = new THREE.DirectionalLight(0xffffff, 2.2);
    light.position.set(1, 2, 3);
    this.scene.add(light);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.7));
    this.bindOrbit();
    this.placeCamera();
    this.renderLoop();
  }

  /** Rebuild the geometry from the API payload; colors from labels only. */
  show(payload: MeshPayload): void {
    if (this.mesh) {
      this.scene.remove(this.mesh);
      this.mesh.geometry.dispose();
      (this.mesh.material as THREE.Material).dispose();
    }
    const faceCount = payload.faces.length;
    const positions = new Float32Array(faceCount * 9);
    for (let f = 0; f < faceCount; f++) {
      for (let corner = 0; corner < 3; corner++) {
        const vertex = payload.vertices[payload.faces[f][corner]];
        positions.set(vertex, 9 * f + 3 * corner);
      }
    }
    const geometry = new THREE.BufferGeometry();
    geometry.setAttribute("position", new THREE.BufferAttribute(positions, 3));
    geometry.setAttribute(
      "color",
      new THREE.BufferAttribute(vertexColors(payload.labels), 3),
    );
    geometry.computeVertexNormals();
    const material = new THREE.MeshLambertMaterial({
      vertexColors: true,
      side: THREE.DoubleSide,
    });
    this.mesh = new THREE.Mesh(geometry, material);
    this.scene.add(this.mesh);
  }

  private bindOrbit(): void {
    let dragging = false;
    let lastX = 0;
    let lastY = 0;
    this.canvas.addEventListener("pointerdown", (e) => {
      dragging = true;
      lastX = e.clientX;
      lastY = e.clientY;
      this.canvas.setPointerCapture(e.pointerId);
    });
    this.canvas.addEventListener("pointermove", (e) => {
      if (!dragging) return;
      this.azimuth -= (e.clientX - lastX) * 0.01;
      this.elevation = Math.min(
        1.5,
        Math.max(-1.5, this.elevation + (e.clientY - lastY) * 0.01),
      );
      lastX = e.clientX;
      lastY = e.clientY;
      this.placeCamera();
    });
    this.canvas.addEventListener("pointerup", () => (dragging = false));
    this.canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      this.radius = Math.min(10, Math.max(1.3, this.radius * (1 + e.deltaY * 0.001)));
      this.placeCamera();
    });
  }

  private placeCamera(): void {
    this.camera.position.set(
      this.radius * Math.cos(this.elevation) * Math.sin(this.azimuth),
      this.radius * Math.sin(this.elevation),
      this.radius * Math.cos(this.elevation) * Math.cos(this.azimuth),
    );
    this.camera.lookAt(0, 0, 0);
  }

  private renderLoop(): void {
    const tick = () => {
      this.renderer.render(this.scene, this.camera);
      requestAnimationFrame(tick);
    };
    requestAnimationFrame(tick);
  }
}
