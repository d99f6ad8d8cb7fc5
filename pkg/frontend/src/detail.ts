/** Manufacturer detail panel: one id in, three fetches out (detail,
 * label chips, neighbors), rendered into a container. The three
 * requests run concurrently; labels and neighbors degrade gracefully
 * when the service has no model or embeddings loaded.
 */

import type { ManufacturerDetail, MskgApi, RankedManufacturer, WeightedNeighbor } from "./api.js";
import { ApiError } from "./api.js";
import { cellText } from "./table.js";

export interface DetailResult {
  detail: ManufacturerDetail | null;
  labels: string[] | null;
  neighbors: RankedManufacturer[] | null;
  notFound: boolean;
  errors: string[];
}

export async function fetchDetail(
  api: MskgApi,
  id: string,
  neighborCount = 10,
): Promise<DetailResult> {
  const result: DetailResult = {
    detail: null,
    labels: null,
    neighbors: null,
    notFound: false,
    errors: [],
  };
  const [detail, labels, recommend] = await Promise.allSettled([
    api.manufacturer(id),
    api.labels(id),
    api.recommend(id, neighborCount),
  ]);

  if (detail.status === "fulfilled") {
    result.detail = detail.value;
  } else if (detail.reason instanceof ApiError && detail.reason.status === 404) {
    result.notFound = true;
    return result;
  } else {
    result.errors.push(String(detail.reason));
  }

  if (labels.status === "fulfilled") {
    result.labels = labels.value.labels;
  } else if (!(labels.reason instanceof ApiError && [404, 503].includes(labels.reason.status))) {
    result.errors.push(String(labels.reason));
  }

  if (recommend.status === "fulfilled") {
    result.neighbors = recommend.value.ranking;
  } else if (!(recommend.reason instanceof ApiError && [400, 404, 503].includes(recommend.reason.status))) {
    result.errors.push(String(recommend.reason));
  }
  return result;
}

function weightedList(doc: Document, title: string, items: WeightedNeighbor[]): HTMLElement {
  const section = doc.createElement("section");
  const heading = doc.createElement("h3");
  heading.textContent = title;
  section.appendChild(heading);
  const list = doc.createElement("ul");
  for (const item of items) {
    const li = doc.createElement("li");
    li.textContent = `${item.name} (${cellText(item.weight)})`;
    list.appendChild(li);
  }
  section.appendChild(list);
  return section;
}

export function renderDetail(
  container: HTMLElement,
  result: DetailResult,
  doc: Document,
  onSelect?: (id: string) => void,
): void {
  container.textContent = "";
  if (result.notFound) {
    const panel = doc.createElement("p");
    panel.className = "not-found";
    panel.textContent = "unknown manufacturer";
    container.appendChild(panel);
    return;
  }
  if (!result.detail) {
    const panel = doc.createElement("p");
    panel.className = "error";
    panel.textContent = result.errors.join("; ") || "detail unavailable";
    container.appendChild(panel);
    return;
  }

  const heading = doc.createElement("h2");
  heading.textContent = result.detail.name;
  container.appendChild(heading);

  if (result.labels) {
    const chips = doc.createElement("div");
    chips.className = "chips";
    for (const label of result.labels) {
      const chip = doc.createElement("span");
      chip.className = "chip";
      chip.textContent = label;
      chips.appendChild(chip);
    }
    container.appendChild(chips);
  }

  container.appendChild(weightedList(doc, "services", result.detail.services));
  container.appendChild(
    weightedList(doc, "certifications", result.detail.certifications),
  );
  container.appendChild(weightedList(doc, "locations", result.detail.locations));

  if (result.neighbors && result.neighbors.length > 0) {
    const section = doc.createElement("section");
    const heading3 = doc.createElement("h3");
    heading3.textContent = "similar manufacturers";
    section.appendChild(heading3);
    const list = doc.createElement("ol");
    for (const neighbor of result.neighbors) {
      const li = doc.createElement("li");
      const link = doc.createElement("a");
      link.href = "#";
      link.textContent = `${neighbor.id} (${cellText(neighbor.similarity)})`;
      if (onSelect) {
        link.addEventListener("click", (event) => {
          event.preventDefault();
          onSelect(neighbor.id);
        });
      }
      li.appendChild(link);
      list.appendChild(li);
    }
    section.appendChild(list);
    container.appendChild(section);
  }

  if (result.errors.length > 0) {
    const note = doc.createElement("p");
    note.className = "error";
    note.textContent = result.errors.join("; ");
    container.appendChild(note);
  }
}
