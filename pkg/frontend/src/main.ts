import { attachFileSources, createApp } from "./app.js";

const root = document.getElementById("app");
const picker = document.getElementById("file-picker");
const dropZone = document.getElementById("drop-zone");

if (root instanceof HTMLElement && picker instanceof HTMLInputElement && dropZone instanceof HTMLElement) {
  attachFileSources(createApp(root), picker, dropZone);
}
