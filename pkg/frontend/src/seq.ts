/** Request sequencing: stale responses are discarded, not raced.
 *
 * Each fetch family (scenario, map, ...) takes a token before sending; a
 * response is applied only if its token is still the latest.
 */

export class RequestSequencer {
  private latest = 0;

  next(): number {
    this.latest += 1;
    return this.latest;
  }

  isCurrent(token: number): boolean {
    return token === this.latest;
  }
}
