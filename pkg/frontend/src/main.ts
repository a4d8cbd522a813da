import { Api } from "./api.js";
import { SessionStore } from "./store.js";
import { renderApp } from "./view.js";

function mount(): void {
  const app = document.getElementById("app");
  if (!app) throw new Error("missing #app container");
  const params = new URLSearchParams(location.search);
  const sessionId = params.get("session");

  if (!sessionId) {
    app.innerHTML = `
      <form class="open-form">
        <h1>Review console</h1>
        <label>Session id <input name="session" autofocus required></label>
        <button>Open</button>
      </form>`;
    app.querySelector("form")!.addEventListener("submit", (ev) => {
      ev.preventDefault();
      const input = app.querySelector<HTMLInputElement>("input[name=session]")!;
      location.search = `?session=${encodeURIComponent(input.value.trim())}`;
    });
    return;
  }

  const api = new Api(params.get("api") ?? "");
  const store = new SessionStore(api, sessionId);
  store.subscribe((state) => {
    app.innerHTML = renderApp(state);
  });
  // one delegated listener survives re-renders; the store guards double POSTs
  app.addEventListener("click", (ev) => {
    const button = (ev.target as HTMLElement).closest<HTMLElement>("[data-decision]");
    if (button && !button.hasAttribute("disabled")) {
      void store.decide(button.dataset.decision as "approve" | "reject");
    }
  });
  void store.loadExemplars();
  store.startPolling();
}

mount();
