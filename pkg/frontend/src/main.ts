import { ApiClient } from "./api";
import { App } from "./app";

const base = (window as { API_BASE?: string }).API_BASE ?? "";
const container = document.getElementById("app");
if (container) {
  const app = new App(new ApiClient(base), container);
  void app.init();
}
