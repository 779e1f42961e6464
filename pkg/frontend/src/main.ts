import { ApiClient } from "./api.js";
import { App } from "./app.js";

const mount = document.getElementById("app");
if (mount) {
  new App(new ApiClient(""), mount).start();
}
