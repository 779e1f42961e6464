/** Shared test plumbing: a fresh mount point and a poll-until helper, since
 * view event handlers run as detached promises.
 */

export function mountPoint(): HTMLElement {
  document.body.innerHTML = "";
  const mount = document.createElement("div");
  document.body.append(mount);
  return mount;
}

export async function waitFor(
  check: () => boolean,
  timeoutMs = 3000,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (check()) return;
    await new Promise((resolve) => setTimeout(resolve, 10));
  }
  if (!check()) throw new Error("condition not met in time");
}

export function click(element: Element): void {
  element.dispatchEvent(new MouseEvent("click", { bubbles: true, cancelable: true }));
}

export function submit(form: HTMLFormElement): void {
  form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
}

export function setValue(
  input: HTMLInputElement | HTMLTextAreaElement,
  value: string,
): void {
  input.value = value;
  input.dispatchEvent(new Event("input", { bubbles: true }));
}
