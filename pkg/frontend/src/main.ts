/** Browser entry point: same-origin API, world and user picked from the
 * query string (`?world=corridor&user=you`).
 */
import { Client, httpTransport } from "./api.js";
import { App } from "./app.js";

const params = new URLSearchParams(window.location.search);
const root = document.getElementById("app");
if (root === null) throw new Error("missing #app container");

const app = new App(root, new Client(httpTransport()), {
  user: params.get("user") ?? "you",
  world: params.get("world") ?? "corridor",
});

void app.start();
