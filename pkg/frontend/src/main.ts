import { createWizardStore, renderWizard } from "./wizard.js";
import { createWhatifStore, renderWhatif } from "./whatif.js";

function mountTabs(root: HTMLElement): void {
  const tabs = document.createElement("div");
  tabs.className = "tabs";
  const wizardBtn = document.createElement("button");
  wizardBtn.textContent = "Question wizard";
  const whatifBtn = document.createElement("button");
  whatifBtn.textContent = "What-if explorer";
  tabs.appendChild(wizardBtn);
  tabs.appendChild(whatifBtn);

  const wizardPane = document.createElement("div");
  const whatifPane = document.createElement("div");
  root.appendChild(tabs);
  root.appendChild(wizardPane);
  root.appendChild(whatifPane);

  renderWizard(wizardPane, createWizardStore());
  let whatifMounted = false;

  function show(pane: "wizard" | "whatif"): void {
    wizardPane.style.display = pane === "wizard" ? "" : "none";
    whatifPane.style.display = pane === "whatif" ? "" : "none";
    wizardBtn.classList.toggle("active", pane === "wizard");
    whatifBtn.classList.toggle("active", pane === "whatif");
    if (pane === "whatif" && !whatifMounted) {
      whatifMounted = true;
      renderWhatif(whatifPane, createWhatifStore());
    }
  }

  wizardBtn.addEventListener("click", () => show("wizard"));
  whatifBtn.addEventListener("click", () => show("whatif"));
  show("wizard");
}

const root = document.getElementById("app");
if (root) mountTabs(root);
