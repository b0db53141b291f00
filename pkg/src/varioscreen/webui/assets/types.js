/** Payload shapes served by the review server's JSON API. */
export {};
