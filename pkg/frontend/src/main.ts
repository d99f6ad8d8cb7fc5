/** Browser bootstrap: find the page chrome, connect to the service
 * named by ?api= (default: same origin), kick off the scatter load. */

import { MskgApi } from "./api.js";
import { App } from "./app.js";
import type { AppElements } from "./app.js";

function required<T extends Element>(selector: string): T {
  const el = document.querySelector<T>(selector);
  if (!el) throw new Error(`missing page element: ${selector}`);
  return el;
}

const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? window.location.origin;

const elements: AppElements = {
  form: required<HTMLFormElement>("#qa-form"),
  input: required<HTMLInputElement>("#qa-input"),
  submit: required<HTMLButtonElement>("#qa-submit"),
  log: required<HTMLElement>("#qa-log"),
  detail: required<HTMLElement>("#detail"),
  status: required<HTMLElement>("#status"),
  canvas: document.querySelector<HTMLCanvasElement>("#scatter"),
};

const app = new App(new MskgApi(base), elements, document);
void app.start();
void app.loadCoords(params.get("coords") ?? "./coords.tsv");
