// First-run tutorial overlay, shown until dismissed once.

const STORAGE_KEY = "ventlab-tutorial-done";

const STEPS = [
  "Your wrist sensor needs about a minute to warm up before it reports CO2.",
  "Click anywhere on the floor to walk there. The dotted ring is your 1 m reach.",
  "Press B (or the Place bubble button) to drop a bubble where you stand. " +
    "Greener and smaller means cleaner air; red and large means trouble.",
  "Bubbles only refresh while you stand within reach of them, and they fade " +
    "when their data goes stale, so revisit them.",
  "Click devices to toggle them; drag from a fan to aim it. The split AC " +
    "recirculates air and will not clear CO2; windows and ventilators will.",
  "Get every bubble under 800 ppm and hold it for a minute to finish. You " +
    "can keep playing after the banner appears.",
];

export function shouldShowTutorial(): boolean {
  try {
    return localStorage.getItem(STORAGE_KEY) === null;
  } catch {
    return false;
  }
}

export function markTutorialDone(): void {
  try {
    localStorage.setItem(STORAGE_KEY, "1");
  } catch {
    // private mode; show it again next time
  }
}

export function buildTutorial(onDone: () => void): HTMLElement {
  const overlay = document.createElement("div");
  overlay.className = "tutorial-overlay";
  const card = document.createElement("div");
  card.className = "tutorial-card";
  const title = document.createElement("h2");
  title.textContent = "How to clear the air";
  card.appendChild(title);
  const list = document.createElement("ol");
  for (const step of STEPS) {
    const li = document.createElement("li");
    li.textContent = step;
    list.appendChild(li);
  }
  card.appendChild(list);
  const button = document.createElement("button");
  button.textContent = "Got it";
  button.addEventListener("click", () => {
    markTutorialDone();
    overlay.remove();
    onDone();
  });
  card.appendChild(button);
  overlay.appendChild(card);
  return overlay;
}
