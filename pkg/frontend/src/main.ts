import { ApiClient } from "./api.js";
import { App } from "./ui.js";

const root = document.getElementById("app");
if (root) {
  void new App(new ApiClient(), root).start();
}
