import { SearchController } from "./controller.js";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}
const base = document.documentElement.dataset.apiBase ?? "";
const controller = new SearchController(root, { base });
void controller.checkHealth();
