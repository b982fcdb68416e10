import { clear, el } from "./dom";

// Non-blocking error banner; the rest of the page stays usable.

export class Banner {
  constructor(private host: HTMLElement) {}

  show(message: string, retry?: () => void): void {
    clear(this.host);
    const box = el("div", { class: "banner", role: "alert" }, el("span", {}, message));
    if (retry) {
      const button = el("button", { class: "banner-retry" }, "Retry");
      button.addEventListener("click", () => {
        this.hide();
        retry();
      });
      box.append(button);
    }
    const dismiss = el("button", { class: "banner-dismiss", title: "Dismiss" }, "×");
    dismiss.addEventListener("click", () => this.hide());
    box.append(dismiss);
    this.host.append(box);
  }

  hide(): void {
    clear(this.host);
  }
}
